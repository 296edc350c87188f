//! Fisher-information bounds on position accuracy.
//!
//! Each separable path contributes ranging information along its arrival
//! direction, weighted by its SINR and the squared effective bandwidth of the
//! pulse. The inverse of the summed information bounds the position error
//! covariance.

use std::f64::consts::PI;

use nalgebra::Matrix2;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{MintError, Result};
use crate::waveform::Pulse;
use crate::SPEED_OF_LIGHT;

/// Largest condition number accepted when inverting an EFIM.
pub const MAX_CONDITION: f64 = 1e12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MpcSinr {
    pub va_id: usize,
    /// Linear.
    pub sinr: f64,
    /// Arrival direction, radians.
    pub angle: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Efim {
    pub matrix: Matrix2<f64>,
    pub beta: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PositionCrlb {
    /// `trace(J^-1)`, m^2.
    pub trace: f64,
    pub var_x: f64,
    pub var_y: f64,
}

impl PositionCrlb {
    /// Square root of the trace, m.
    pub fn rms(&self) -> f64 {
        self.trace.sqrt()
    }
}

/// `|alpha|^2 / (N0 + Tp * S_nu(tau))`.
pub fn sinr(alpha: Complex64, noise_psd: f64, tp: f64, s_nu: f64) -> Result<f64> {
    let denom = noise_psd + tp * s_nu;
    if denom == 0.0 {
        return Err(MintError::InfiniteSinr);
    }
    if !(denom > 0.0) {
        return Err(MintError::invalid("noise_psd", format!("interference {denom} must be positive")));
    }
    Ok(alpha.norm_sqr() / denom)
}

/// Projection onto the direction `(cos phi, sin phi)`.
pub fn ranging_direction_matrix(phi: f64) -> Matrix2<f64> {
    let (s, c) = phi.sin_cos();
    Matrix2::new(c * c, c * s, c * s, s * s)
}

pub fn efim(mpcs: &[MpcSinr], beta: f64) -> Efim {
    let scale = 8.0 * PI * PI * beta * beta / (SPEED_OF_LIGHT * SPEED_OF_LIGHT);
    let matrix = mpcs
        .iter()
        .fold(Matrix2::zeros(), |acc, m| acc + ranging_direction_matrix(m.angle) * m.sinr)
        * scale;
    Efim { matrix, beta }
}

/// Inverse of the EFIM, rejected when it is (numerically) singular.
pub fn position_crlb(j: &Efim) -> Result<PositionCrlb> {
    let eig = j.matrix.symmetric_eigen().eigenvalues;
    let (lo, hi) = (eig.min(), eig.max());
    let condition = if lo > 0.0 { hi / lo } else { f64::INFINITY };
    if !(condition < MAX_CONDITION) {
        return Err(MintError::SingularFim { condition });
    }
    let inv = j.matrix.try_inverse().ok_or(MintError::SingularFim { condition })?;
    Ok(PositionCrlb {
        trace: inv.trace(),
        var_x: inv[(0, 0)],
        var_y: inv[(1, 1)],
    })
}

/// Lower bound on the range variance of a single path, m^2.
pub fn ranging_crlb(sinr: f64, beta: f64) -> f64 {
    SPEED_OF_LIGHT * SPEED_OF_LIGHT / (8.0 * PI * PI * beta * beta * sinr)
}

/// Ratio of the instantaneous position error to the RMS ranging error.
///
/// This is an empirical snapshot of the geometry quality, not the classical
/// geometry-only DOP. `None` when the ranging error is zero.
pub fn hdop(position_error: f64, rms_ranging_error: f64) -> Option<f64> {
    (rms_ranging_error > 0.0).then(|| position_error / rms_ranging_error)
}

/// `sqrt(int f^2 P(f) df / int P(f) df)` over `[f_lo, f_hi]` by composite
/// Simpson integration with `intervals` (even) subintervals.
pub fn rms_bandwidth(power: impl Fn(f64) -> f64, f_lo: f64, f_hi: f64, intervals: usize) -> f64 {
    let n = intervals.max(2) & !1;
    let h = (f_hi - f_lo) / n as f64;
    let (mut m0, mut m2) = (0.0, 0.0);
    for i in 0..=n {
        let w = if i == 0 || i == n {
            1.0
        } else if i % 2 == 1 {
            4.0
        } else {
            2.0
        };
        let f = f_lo + i as f64 * h;
        let p = power(f);
        m0 += w * p;
        m2 += w * f * f * p;
    }
    (m2 / m0).sqrt()
}

/// Effective (RMS) bandwidth of the pulse about its baseband centre.
pub fn effective_bandwidth(pulse: &Pulse) -> f64 {
    let edge = pulse.occupied_bandwidth() / 2.0;
    rms_bandwidth(|f| pulse.spectrum(f).powi(2), -edge, edge, 4096)
}

/// Indices `i` with `delays[i + 1] - delays[i] < tp` (sorted input).
pub fn separability_violations(delays: &[f64], tp: f64) -> Vec<usize> {
    delays
        .windows(2)
        .enumerate()
        .filter(|(_, w)| w[1] - w[0] < tp)
        .map(|(i, _)| i)
        .collect()
}
