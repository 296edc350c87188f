//! Multipath component extraction and ranging.
//!
//! [`extract_mpcs`] removes pulses from the received signal one at a time,
//! always taking the delay whose pulse correlation with the residual is
//! largest, never within one pulse duration of a delay already taken. The
//! first arriving extracted path gives the ML range; jump-back search-forward
//! ([`jbsf_range`]) instead searches backwards from the signal maximum for the
//! earliest threshold crossing.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{MintError, Result};
use crate::fft;
use crate::waveform::{Pulse, SignalFrame};
use crate::SPEED_OF_LIGHT;

pub const DEFAULT_GAMMA: f64 = 0.1;
pub const DEFAULT_K_MAX: usize = 20;
pub const DEFAULT_PRELOS_WINDOW: f64 = 10e-9;
pub const DEFAULT_SEARCHBACK: f64 = 100e-9;
/// Upper clamp of K-factor estimates.
pub const KLOS_CAP_DB: f64 = 60.0;
/// Reported when no line-of-sight component is found.
pub const KLOS_FLOOR_DB: f64 = -60.0;
/// Cap on the coordinate-wise re-estimation sweeps after the greedy pass.
const MAX_REFINE_SWEEPS: usize = 20;

#[derive(Debug, Clone, PartialEq)]
pub struct MpcEstimateSet {
    /// Strictly increasing.
    pub delays: Vec<f64>,
    pub amplitudes: Vec<Complex64>,
    pub position_index: usize,
    pub bs_id: usize,
}

impl MpcEstimateSet {
    pub fn len(&self) -> usize {
        self.delays.len()
    }

    pub fn is_empty(&self) -> bool {
        self.delays.is_empty()
    }

    /// Path lengths `c * tau`.
    pub fn distances(&self) -> Vec<f64> {
        self.delays.iter().map(|d| d * SPEED_OF_LIGHT).collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum RangingMethod {
    Ml,
    Jbsf,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RangeEstimate {
    pub distance: f64,
    pub method: RangingMethod,
    pub position_index: usize,
    pub bs_id: usize,
}

fn prelos_samples(frame: &SignalFrame, prelos_window: f64) -> Result<usize> {
    let n = (prelos_window / frame.sample_interval).floor();
    if !(prelos_window > 0.0) || n < 1.0 || n as usize > frame.len() {
        return Err(MintError::WindowOutsideFrame {
            start: frame.start_delay,
            end: frame.start_delay + prelos_window,
        });
    }
    Ok(n as usize)
}

/// Time average of `|r|` over the first `prelos_window` seconds of the frame.
pub fn noise_floor(frame: &SignalFrame, prelos_window: f64) -> Result<f64> {
    let n = prelos_samples(frame, prelos_window)?;
    Ok(frame.samples[..n].iter().map(|s| s.norm()).sum::<f64>() / n as f64)
}

/// `gamma * (max - floor) + floor`.
pub fn relative_threshold(max_amplitude: f64, noise_floor: f64, gamma: f64) -> f64 {
    gamma * (max_amplitude - noise_floor) + noise_floor
}

fn max_abs(frame: &SignalFrame) -> (usize, f64) {
    frame
        .samples
        .iter()
        .enumerate()
        .map(|(i, s)| (i, s.norm()))
        .fold((0, f64::NEG_INFINITY), |a, b| if b.1 > a.1 { b } else { a })
}

/// Amplitude threshold between the pre-LOS noise floor and the signal maximum.
pub fn noise_threshold(frame: &SignalFrame, gamma: f64, prelos_window: f64) -> Result<f64> {
    if !(gamma > 0.0 && gamma < 1.0) {
        return Err(MintError::invalid("gamma", format!("{gamma} not in (0, 1)")));
    }
    let floor = noise_floor(frame, prelos_window)?;
    Ok(relative_threshold(max_abs(frame).1, floor, gamma))
}

/// Mutable state of one extraction run.
struct Extraction<'a> {
    pulse: &'a Pulse,
    dt: f64,
    start: f64,
    residual: Vec<Complex64>,
    /// Correlation of the residual with the pulse on the sample grid.
    corr: Vec<Complex64>,
}

impl<'a> Extraction<'a> {
    fn new(frame: &SignalFrame, pulse: &'a Pulse) -> Self {
        let dt = frame.sample_interval;
        let mut corr = fft::convolve_with_pulse(&frame.samples, pulse);
        for c in &mut corr {
            *c *= dt;
        }
        Self {
            pulse,
            dt,
            start: frame.start_delay,
            residual: frame.samples.clone(),
            corr,
        }
    }

    fn delay(&self, i: usize) -> f64 {
        self.start + i as f64 * self.dt
    }

    fn support(&self, tau: f64) -> std::ops::RangeInclusive<usize> {
        let c = (tau - self.start) / self.dt;
        let h = self.pulse.half_width() / self.dt;
        let lo = (c - h).ceil().max(0.0) as usize;
        let hi = ((c + h).floor().min(self.residual.len() as f64 - 1.0)).max(0.0) as usize;
        lo..=hi
    }

    /// `sum_n x[n] s(t_n - tau) dt` over the pulse support.
    fn project(&self, x: &[Complex64], tau: f64) -> Complex64 {
        let mut acc = Complex64::new(0.0, 0.0);
        for n in self.support(tau) {
            acc += x[n] * self.pulse.value_interp(self.delay(n) - tau);
        }
        acc * self.dt
    }

    fn add_pulse(&mut self, tau: f64, alpha: Complex64) {
        for n in self.support(tau) {
            let v = self.pulse.value_interp(self.delay(n) - tau);
            self.residual[n] += alpha * v;
        }
    }

    /// Keeps the grid correlation in sync after adding `alpha * s(t - tau)`;
    /// returns the affected index range.
    fn update_correlation(&mut self, tau: f64, alpha: Complex64) -> std::ops::RangeInclusive<usize> {
        let c = (tau - self.start) / self.dt;
        let h = 2.0 * self.pulse.half_width() / self.dt;
        let lo = (c - h).ceil().max(0.0) as usize;
        let hi = ((c + h).floor().min(self.corr.len() as f64 - 1.0)).max(0.0) as usize;
        for m in lo..=hi.min(self.corr.len().saturating_sub(1)) {
            let r = self.pulse.autocorrelation(self.delay(m) - tau);
            self.corr[m] += alpha * r;
        }
        lo..=hi
    }

    /// Parabolic peak refinement of the correlation magnitude around index `m`.
    fn interpolate_peak(&self, m: usize) -> f64 {
        if m == 0 || m + 1 >= self.corr.len() {
            return self.delay(m);
        }
        let (a, b, c) = (self.corr[m - 1].norm(), self.corr[m].norm(), self.corr[m + 1].norm());
        let denom = a - 2.0 * b + c;
        let offset = if denom < 0.0 {
            (0.5 * (a - c) / denom).clamp(-0.5, 0.5)
        } else {
            0.0
        };
        self.delay(m) + offset * self.dt
    }

    /// Re-estimates one path against the residual with that path added back.
    fn refine(&mut self, tau: f64, alpha: Complex64) -> (f64, Complex64) {
        self.add_pulse(tau, alpha);
        let centre = ((tau - self.start) / self.dt).round();
        let lo = centre as isize - 2;
        let mut mags = [0.0; 5];
        for (k, mag) in mags.iter_mut().enumerate() {
            let i = lo + k as isize;
            if i >= 0 && (i as usize) < self.residual.len() {
                *mag = self.project(&self.residual, self.delay(i as usize)).norm();
            }
        }
        let best = (1..4).max_by(|&a, &b| mags[a].total_cmp(&mags[b])).unwrap();
        let offset = {
            let (a, b, c) = (mags[best - 1], mags[best], mags[best + 1]);
            let denom = a - 2.0 * b + c;
            if denom < 0.0 {
                (0.5 * (a - c) / denom).clamp(-0.5, 0.5)
            } else {
                0.0
            }
        };
        let new_tau = self.start + (lo as f64 + best as f64 + offset) * self.dt;
        let new_alpha = self.project(&self.residual, new_tau);
        self.add_pulse(new_tau, -new_alpha);
        (new_tau, new_alpha)
    }
}

/// Coordinate-wise re-estimation until the delays settle.
fn refine_all(ex: &mut Extraction<'_>, paths: &mut Vec<(f64, Complex64)>, tp: f64) {
    for _ in 0..MAX_REFINE_SWEEPS {
        let mut moved = 0.0f64;
        let mut k = 0;
        while k < paths.len() {
            let (tau, alpha) = paths[k];
            let (new_tau, new_alpha) = ex.refine(tau, alpha);
            let blocking: Vec<usize> = (0..paths.len())
                .filter(|&j| j != k && (paths[j].0 - new_tau).abs() < tp)
                .collect();
            if blocking.iter().all(|&j| paths[j].1.norm() < new_alpha.norm()) {
                // a weaker neighbour in the way is a split-off of this path
                moved = moved.max((new_tau - tau).abs());
                paths[k] = (new_tau, new_alpha);
                for &j in blocking.iter().rev() {
                    let (t, a) = paths.remove(j);
                    ex.add_pulse(t, a);
                    if j < k {
                        k -= 1;
                    }
                }
                if !blocking.is_empty() {
                    moved = f64::INFINITY;
                }
            } else {
                // keep the previous estimate
                ex.add_pulse(new_tau, new_alpha);
                let a = ex.project(&ex.residual, tau);
                ex.add_pulse(tau, -a);
                paths[k] = (tau, a);
            }
            k += 1;
        }
        if moved < 1e-2 * ex.dt {
            break;
        }
    }
}

/// Greedy maximum-likelihood extraction of up to `k_max` separable paths.
///
/// Each iteration picks the grid delay maximizing the magnitude of the pulse
/// correlation with the residual, excluding delays within one pulse duration
/// of paths already taken, refines it by parabolic interpolation, projects
/// the residual onto the shifted pulse for the amplitude and subtracts the
/// path. Extraction stops when the candidate's peak amplitude `|alpha| s(0)`
/// drops below `threshold`. Afterwards every path is re-estimated a few times
/// with all other paths removed, which undoes the cross-talk of neighbouring
/// pulses at separations of a few `Tp`; paths whose refined amplitude falls
/// below the threshold are dropped.
pub fn extract_mpcs(
    frame: &SignalFrame,
    pulse: &Pulse,
    k_max: usize,
    threshold: f64,
) -> MpcEstimateSet {
    let mut ex = Extraction::new(frame, pulse);
    let tp = pulse.duration();
    let peak_gain = pulse.value(0.0);
    // squared correlation magnitude; -inf marks grid delays already excluded
    let mut power: Vec<f64> = ex.corr.iter().map(|c| c.norm_sqr()).collect();
    let mut paths: Vec<(f64, Complex64)> = Vec::new();

    while paths.len() < k_max.max(1) {
        let mut m = usize::MAX;
        let mut best = f64::NEG_INFINITY;
        for (i, &p) in power.iter().enumerate() {
            if p > best {
                best = p;
                m = i;
            }
        }
        if m == usize::MAX {
            break;
        }
        let tau = ex.interpolate_peak(m);
        if paths.iter().any(|&(t, _)| (t - tau).abs() < tp) {
            power[m] = f64::NEG_INFINITY;
            continue;
        }
        let alpha = ex.project(&ex.residual, tau);
        if alpha.norm() * peak_gain < threshold {
            break;
        }
        ex.add_pulse(tau, -alpha);
        for i in ex.update_correlation(tau, -alpha) {
            if let Some(p) = power.get_mut(i) {
                if *p != f64::NEG_INFINITY {
                    *p = ex.corr[i].norm_sqr();
                }
            }
        }
        let lo = ((tau - tp - ex.start) / ex.dt).floor().max(0.0) as usize;
        let hi = (((tau + tp - ex.start) / ex.dt).ceil().max(0.0) as usize).min(power.len());
        for (i, p) in power.iter_mut().enumerate().take(hi).skip(lo) {
            if (ex.delay(i) - tau).abs() < tp {
                *p = f64::NEG_INFINITY;
            }
        }
        paths.push((tau, alpha));
    }

    // cross-talk can let the greedy loop accept a path that vanishes once its
    // neighbours are refined
    loop {
        refine_all(&mut ex, &mut paths, tp);
        let before = paths.len();
        for k in (0..paths.len()).rev() {
            let (tau, alpha) = paths[k];
            if alpha.norm() * peak_gain < threshold {
                ex.add_pulse(tau, alpha);
                paths.remove(k);
            }
        }
        if paths.len() == before {
            break;
        }
    }
    paths.sort_by(|a, b| a.0.total_cmp(&b.0));
    MpcEstimateSet {
        delays: paths.iter().map(|p| p.0).collect(),
        amplitudes: paths.iter().map(|p| p.1).collect(),
        position_index: frame.position_index,
        bs_id: frame.bs_id,
    }
}

/// Range of the first arriving extracted path.
pub fn ml_range(est: &MpcEstimateSet) -> Result<RangeEstimate> {
    let first = est
        .delays
        .iter()
        .copied()
        .min_by(f64::total_cmp)
        .ok_or(MintError::RangingOutage {
            position_index: est.position_index,
            bs_id: est.bs_id,
        })?;
    Ok(RangeEstimate {
        distance: (first * SPEED_OF_LIGHT).max(0.0),
        method: RangingMethod::Ml,
        position_index: est.position_index,
        bs_id: est.bs_id,
    })
}

/// Delay found by jump-back search-forward: the earliest sample within
/// `searchback` before the signal maximum whose magnitude reaches the
/// relative threshold `xi`.
pub fn jbsf_delay(frame: &SignalFrame, xi: f64, searchback: f64, prelos_window: f64) -> Result<f64> {
    if !(xi > 0.0 && xi < 1.0) {
        return Err(MintError::invalid("xi", format!("{xi} not in (0, 1)")));
    }
    if frame.is_empty() {
        return Err(MintError::Empty("signal frame"));
    }
    let floor = noise_floor(frame, prelos_window)?;
    let (peak, max) = max_abs(frame);
    let threshold = relative_threshold(max, floor, xi);
    let back = (searchback / frame.sample_interval).floor() as usize;
    let start = peak.saturating_sub(back);
    let first = (start..=peak)
        .find(|&i| frame.samples[i].norm() >= threshold)
        .unwrap_or(peak);
    Ok(frame.delay_of(first))
}

pub fn jbsf_range(
    frame: &SignalFrame,
    xi: f64,
    searchback: f64,
    prelos_window: f64,
) -> Result<RangeEstimate> {
    let delay = jbsf_delay(frame, xi, searchback, prelos_window)?;
    Ok(RangeEstimate {
        distance: (delay * SPEED_OF_LIGHT).max(0.0),
        method: RangingMethod::Jbsf,
        position_index: frame.position_index,
        bs_id: frame.bs_id,
    })
}

/// K-factor from precomputed extraction results, in dB.
pub fn klos_from_estimates(frame: &SignalFrame, pulse: &Pulse, est: &MpcEstimateSet) -> f64 {
    let Some((&tau, &alpha)) = est.delays.first().zip(est.amplitudes.first()) else {
        return KLOS_FLOOR_DB;
    };
    let mut residual = frame.clone();
    residual.add_pulse(pulse, tau, -alpha);
    let los = alpha.norm_sqr();
    let rest = residual.energy();
    if rest <= los * 10f64.powf(-KLOS_CAP_DB / 10.0) {
        return KLOS_CAP_DB;
    }
    (10.0 * (los / rest).log10()).clamp(KLOS_FLOOR_DB, KLOS_CAP_DB)
}

/// Energy ratio of the line-of-sight component to the rest of the frame, in dB.
///
/// The LOS is the first arriving path of the default extraction
/// (`gamma = 0.1`, `K = 20`); only it is subtracted for the residual energy.
pub fn estimate_klos(frame: &SignalFrame, pulse: &Pulse, prelos_window: f64) -> Result<f64> {
    let threshold = noise_threshold(frame, DEFAULT_GAMMA, prelos_window)?;
    let est = extract_mpcs(frame, pulse, DEFAULT_K_MAX, threshold);
    Ok(klos_from_estimates(frame, pulse, &est))
}
