use std::f64::consts::PI;

use num_complex::Complex64;

use super::{Mpc, Pulse, SignalFrame};
use crate::error::{MintError, Result};
use crate::fft;

/// Sampled channel transfer function `H[k]` at `start_freq + k * freq_spacing`.
#[derive(Debug, Clone, PartialEq)]
pub struct FrequencyResponse {
    pub values: Vec<Complex64>,
    pub freq_spacing: f64,
    pub start_freq: f64,
    pub position_index: usize,
    pub bs_id: usize,
}

impl FrequencyResponse {
    /// Maximum resolvable delay `1 / df`.
    pub fn max_delay(&self) -> f64 {
        1.0 / self.freq_spacing
    }

    pub fn frequency(&self, k: usize) -> f64 {
        self.start_freq + k as f64 * self.freq_spacing
    }

    pub fn stop_freq(&self) -> f64 {
        self.frequency(self.values.len().saturating_sub(1))
    }
}

/// Forward model of a specular channel: `H[k] = sum_i alpha_i exp(-j 2 pi f_k tau_i)`.
pub fn synthesize_frequency_response(
    mpcs: &[Mpc],
    start_freq: f64,
    freq_spacing: f64,
    bins: usize,
) -> FrequencyResponse {
    let values = (0..bins)
        .map(|k| {
            let f = start_freq + k as f64 * freq_spacing;
            mpcs.iter()
                .map(|m| m.amplitude * Complex64::from_polar(1.0, -2.0 * PI * f * m.delay))
                .sum()
        })
        .collect();
    FrequencyResponse {
        values,
        freq_spacing,
        start_freq,
        position_index: 0,
        bs_id: 0,
    }
}

/// Cuts the pulse band out of a measured transfer function and returns the
/// equivalent baseband signal over one period `1 / df`.
///
/// Bins inside the pulse band are weighted by the pulse spectrum, inverse
/// transformed with `N = ceil(1 / (df * dtau))` points and shifted to
/// baseband. The output grid is `1 / (N df)`, which equals the pulse grid
/// whenever `1 / (df * dtau)` is an integer.
pub fn band_extract(h: &FrequencyResponse, pulse: &Pulse) -> Result<SignalFrame> {
    if h.values.is_empty() {
        return Err(MintError::Empty("frequency response"));
    }
    if !(h.freq_spacing > 0.0) {
        return Err(MintError::invalid("freq_spacing", "must be positive"));
    }
    let half_band = pulse.occupied_bandwidth() / 2.0;
    let lo = pulse.center_freq() - half_band;
    let hi = pulse.center_freq() + half_band;
    let tol = 1e-9 * h.freq_spacing;
    if lo < h.start_freq - tol || hi > h.stop_freq() + tol {
        return Err(MintError::BandMismatch {
            lo,
            hi,
            measured_lo: h.start_freq,
            measured_hi: h.stop_freq(),
        });
    }
    let k_lo = ((lo - h.start_freq) / h.freq_spacing - 1e-9).ceil().max(0.0) as usize;
    let k_hi = (((hi - h.start_freq) / h.freq_spacing + 1e-9).floor() as usize).min(h.values.len() - 1);
    let n_fft = (1.0 / (h.freq_spacing * pulse.sample_interval()) - 1e-9).ceil() as usize;
    if n_fft < k_hi - k_lo + 1 {
        return Err(MintError::invalid("sample_interval", "coarser than the extracted band allows"));
    }
    let mut buf = vec![Complex64::new(0.0, 0.0); n_fft];
    for k in k_lo..=k_hi {
        let f = h.frequency(k);
        buf[k - k_lo] = h.values[k] * pulse.spectrum(f - pulse.center_freq());
    }
    fft::inverse(&mut buf);
    let dt = 1.0 / (n_fft as f64 * h.freq_spacing);
    let shift = pulse.center_freq() - h.frequency(k_lo);
    let samples = buf
        .into_iter()
        .enumerate()
        .map(|(n, v)| {
            let t = n as f64 * dt;
            v * h.freq_spacing * Complex64::from_polar(1.0, -2.0 * PI * shift * t)
        })
        .collect();
    Ok(SignalFrame {
        samples,
        sample_interval: dt,
        start_delay: 0.0,
        position_index: h.position_index,
        bs_id: h.bs_id,
        noise_psd: 0.0,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    // 0.5 ns pulse at 7 GHz on a 1 MHz grid over 3.1..10.6 GHz; 1/(df dtau) = 32000 exactly.
    fn setup() -> (Pulse, f64, f64, usize) {
        let p = Pulse::with_default_grid(0.5e-9, 0.5, 7e9).unwrap();
        (p, 3.1e9, 1e6, 7501)
    }

    fn peak(frame: &SignalFrame) -> (usize, f64) {
        frame
            .samples
            .iter()
            .enumerate()
            .map(|(i, s)| (i, s.norm()))
            .fold((0, 0.0), |a, b| if b.1 > a.1 { b } else { a })
    }

    #[test]
    fn identity_channel_gives_pulse_at_zero() {
        let (p, start, df, bins) = setup();
        let h = FrequencyResponse {
            values: vec![Complex64::new(1.0, 0.0); bins],
            freq_spacing: df,
            start_freq: start,
            position_index: 3,
            bs_id: 1,
        };
        let r = band_extract(&h, &p).unwrap();
        assert_eq!(r.len(), 32000);
        assert!((r.sample_interval - p.sample_interval()).abs() < 1e-20);
        assert_eq!((r.position_index, r.bs_id), (3, 1));
        for n in 0..40isize {
            let idx = n.rem_euclid(r.len() as isize) as usize;
            let idx_neg = (-n).rem_euclid(r.len() as isize) as usize;
            assert!((r.samples[idx].norm() - p.grid_value(n).abs()).abs() < 2e-3 * p.grid_value(0));
            assert!((r.samples[idx_neg].norm() - p.grid_value(-n).abs()).abs() < 2e-3 * p.grid_value(0));
        }
    }

    #[test]
    fn pure_delay_channel() {
        let (p, start, df, bins) = setup();
        let tau0 = 37.25e-9;
        let values = (0..bins)
            .map(|k| Complex64::from_polar(1.0, -2.0 * PI * k as f64 * df * tau0))
            .collect();
        let h = FrequencyResponse {
            values,
            freq_spacing: df,
            start_freq: start,
            position_index: 0,
            bs_id: 0,
        };
        let r = band_extract(&h, &p).unwrap();
        let (i, v) = peak(&r);
        assert!((r.delay_of(i) - tau0).abs() <= p.sample_interval());
        assert!((v - p.grid_value(0)).abs() < 2e-3 * v);
    }

    #[test]
    fn band_mismatch_is_reported() {
        let (p, _, df, _) = setup();
        let h = FrequencyResponse {
            values: vec![Complex64::new(1.0, 0.0); 1000],
            freq_spacing: df,
            start_freq: 6.0e9,
            position_index: 0,
            bs_id: 0,
        };
        assert!(matches!(band_extract(&h, &p), Err(MintError::BandMismatch { .. })));
    }
}
