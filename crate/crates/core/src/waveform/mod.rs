//! Pulse shaping, synthetic received signals and measured-band extraction.
//!
//! The received baseband signal at one trajectory position is the sum of
//! pulses scaled by the complex path amplitudes, the pulse convolved with a
//! diffuse scattering process, and white noise.
//!
//! Noise convention: with sample spacing `dtau`, white noise of spectral level
//! `N0` has per-sample variance `N0 / dtau` (`N0 / (2 dtau)` per quadrature).
//! Correlating with the unit-energy pulse then leaves noise of variance `N0`
//! on the amplitude estimate, so `|alpha|^2 / N0` is the per-path SNR.

mod band;
mod io;
mod pulse;
mod scenario;

pub use band::{band_extract, synthesize_frequency_response, FrequencyResponse};
pub use io::{read_frame, read_frequency_response, write_frame, write_frequency_response};
pub use pulse::{make_pulse, Pulse, TRUNCATION};
pub use scenario::{
    frame_layout_for, scenario_mpcs, scenario_signals, AmplitudeModel, DiffuseSpec, FrameSpec,
};

use num_complex::Complex64;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{MintError, Result};
use crate::fft;

/// One deterministic multipath component.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Mpc {
    pub delay: f64,
    pub amplitude: Complex64,
    pub va_id: Option<usize>,
}

/// Diffuse multipath with an exponential power delay profile starting at `onset_delay`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DiffuseModel {
    pub onset_delay: f64,
    pub total_power: f64,
    pub decay_const: f64,
}

impl DiffuseModel {
    pub fn none() -> Self {
        Self {
            onset_delay: 0.0,
            total_power: 0.0,
            decay_const: 1.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.total_power >= 0.0) {
            return Err(MintError::invalid("total_power", "must be non-negative"));
        }
        if !(self.decay_const > 0.0) {
            return Err(MintError::invalid("decay_const", "must be positive"));
        }
        Ok(())
    }

    /// Power delay profile `S_nu(tau)`; integrates to `total_power`.
    pub fn pdp(&self, tau: f64) -> f64 {
        if tau < self.onset_delay || self.total_power == 0.0 {
            0.0
        } else {
            self.total_power / self.decay_const * (-(tau - self.onset_delay) / self.decay_const).exp()
        }
    }
}

/// Delay span covered by a frame: samples sit at `start_delay + n * dtau`
/// for all such delays below `end_delay`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FrameLayout {
    pub start_delay: f64,
    pub end_delay: f64,
}

impl FrameLayout {
    pub fn new(start_delay: f64, end_delay: f64) -> Self {
        Self {
            start_delay,
            end_delay,
        }
    }

    pub fn sample_count(&self, dtau: f64) -> usize {
        ((self.end_delay - self.start_delay) / dtau).ceil().max(0.0) as usize
    }
}

/// Complex baseband samples of one received signal.
#[derive(Debug, Clone, PartialEq)]
pub struct SignalFrame {
    pub samples: Vec<Complex64>,
    pub sample_interval: f64,
    /// Delay of sample 0.
    pub start_delay: f64,
    pub position_index: usize,
    pub bs_id: usize,
    pub noise_psd: f64,
}

impl SignalFrame {
    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn delay_of(&self, index: usize) -> f64 {
        self.start_delay + index as f64 * self.sample_interval
    }

    /// Fractional sample index of `delay`.
    pub fn index_of(&self, delay: f64) -> f64 {
        (delay - self.start_delay) / self.sample_interval
    }

    pub fn end_delay(&self) -> f64 {
        self.delay_of(self.len())
    }

    /// `integral |r|^2 dt`.
    pub fn energy(&self) -> f64 {
        self.samples.iter().map(|s| s.norm_sqr()).sum::<f64>() * self.sample_interval
    }

    /// Adds `amplitude * s(t - delay)` to the frame.
    pub fn add_pulse(&mut self, pulse: &Pulse, delay: f64, amplitude: Complex64) {
        let center = self.index_of(delay);
        let h = pulse.half_width() / self.sample_interval;
        let lo = (center - h).ceil().max(0.0) as usize;
        let hi = ((center + h).floor() as isize).min(self.len() as isize - 1);
        if hi < lo as isize {
            return;
        }
        for n in lo..=hi as usize {
            let v = pulse.value(self.delay_of(n) - delay);
            self.samples[n] += amplitude * v;
        }
    }
}

/// Deterministic RNG substream for one (position, BS) pair.
pub fn frame_rng(seed: u64, position_index: usize, bs_id: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(((position_index as u64) << 16) | bs_id as u64);
    rng
}

pub(crate) fn complex_normal<R: Rng + ?Sized>(rng: &mut R, variance: f64) -> Complex64 {
    let sd = (variance / 2.0).sqrt();
    let re: f64 = StandardNormal.sample(rng);
    let im: f64 = StandardNormal.sample(rng);
    Complex64::new(re * sd, im * sd)
}

/// Generates `r(t) = sum_k alpha_k s(t - tau_k) + (s * nu)(t) + w(t)` over `layout`.
///
/// `nu` is a zero-mean complex Gaussian uncorrelated-scattering process with
/// power delay profile `dm.pdp`; `w` is white noise of level `noise_psd`
/// (see the module docs for the per-sample convention). The noise is drawn
/// after the diffuse process, so frames with identical RNG state share
/// their realizations.
pub fn synthesize<R: Rng + ?Sized>(
    mpcs: &[Mpc],
    dm: &DiffuseModel,
    noise_psd: f64,
    pulse: &Pulse,
    layout: FrameLayout,
    rng: &mut R,
) -> Result<SignalFrame> {
    if !(noise_psd >= 0.0) {
        return Err(MintError::invalid("noise_psd", "must be non-negative"));
    }
    dm.validate()?;
    let dtau = pulse.sample_interval();
    let n = layout.sample_count(dtau);
    if n == 0 {
        return Err(MintError::invalid("layout", "frame has no samples"));
    }
    if let Some(m) = mpcs
        .iter()
        .find(|m| m.delay < 0.0 || m.delay >= layout.end_delay)
    {
        return Err(MintError::invalid(
            "mpcs",
            format!("delay {:.4e} s outside [0, {:.4e})", m.delay, layout.end_delay),
        ));
    }
    let mut frame = SignalFrame {
        samples: vec![Complex64::new(0.0, 0.0); n],
        sample_interval: dtau,
        start_delay: layout.start_delay,
        position_index: 0,
        bs_id: 0,
        noise_psd,
    };
    for m in mpcs {
        frame.add_pulse(pulse, m.delay, m.amplitude);
    }
    if dm.total_power > 0.0 {
        let taps: Vec<Complex64> = (0..n)
            .map(|i| {
                let p = dm.pdp(frame.delay_of(i));
                if p > 0.0 {
                    complex_normal(rng, p * dtau)
                } else {
                    Complex64::new(0.0, 0.0)
                }
            })
            .collect();
        let diffuse = fft::convolve_with_pulse(&taps, pulse);
        for (s, d) in frame.samples.iter_mut().zip(diffuse) {
            *s += d;
        }
    }
    if noise_psd > 0.0 {
        let var = noise_psd / dtau;
        for s in &mut frame.samples {
            *s += complex_normal(rng, var);
        }
    }
    Ok(frame)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pulse() -> Pulse {
        Pulse::with_default_grid(0.5e-9, 0.5, 7e9).unwrap()
    }

    #[test]
    fn single_clean_pulse() {
        let p = pulse();
        let layout = FrameLayout::new(0.0, 40e-9);
        let mpc = Mpc {
            delay: 10e-9,
            amplitude: Complex64::new(1.0, 0.0),
            va_id: None,
        };
        let mut rng = frame_rng(1, 0, 0);
        let f = synthesize(&[mpc], &DiffuseModel::none(), 0.0, &p, layout, &mut rng).unwrap();
        let (imax, vmax) = f
            .samples
            .iter()
            .enumerate()
            .map(|(i, s)| (i, s.norm()))
            .fold((0, 0.0), |a, b| if b.1 > a.1 { b } else { a });
        assert!((f.delay_of(imax) - 10e-9).abs() <= p.sample_interval());
        assert!((vmax - p.grid_value(0)).abs() < 1e-9 * vmax);
        assert!((f.energy() - 1.0).abs() < 1e-6);
    }

    #[test]
    fn linearity_without_noise() {
        let p = pulse();
        let layout = FrameLayout::new(-5e-9, 60e-9);
        let a = [Mpc {
            delay: 12.3e-9,
            amplitude: Complex64::new(0.3, -0.2),
            va_id: None,
        }];
        let b = [
            Mpc {
                delay: 30.01e-9,
                amplitude: Complex64::new(-0.7, 0.1),
                va_id: None,
            },
            Mpc {
                delay: 31.7e-9,
                amplitude: Complex64::new(0.05, 0.5),
                va_id: None,
            },
        ];
        let dm = DiffuseModel::none();
        let mut rng = frame_rng(0, 0, 0);
        let fa = synthesize(&a, &dm, 0.0, &p, layout, &mut rng).unwrap();
        let fb = synthesize(&b, &dm, 0.0, &p, layout, &mut rng).unwrap();
        let both: Vec<Mpc> = a.iter().chain(&b).copied().collect();
        let fab = synthesize(&both, &dm, 0.0, &p, layout, &mut rng).unwrap();
        for i in 0..fab.len() {
            let sum = fa.samples[i] + fb.samples[i];
            assert!((fab.samples[i] - sum).norm() <= 1e-9 * sum.norm().max(1e-3));
        }
    }

    #[test]
    fn rejects_negative_noise_and_late_paths() {
        let p = pulse();
        let layout = FrameLayout::new(0.0, 20e-9);
        let mut rng = frame_rng(0, 0, 0);
        assert!(synthesize(&[], &DiffuseModel::none(), -1.0, &p, layout, &mut rng).is_err());
        let late = Mpc {
            delay: 25e-9,
            amplitude: Complex64::new(1.0, 0.0),
            va_id: None,
        };
        assert!(synthesize(&[late], &DiffuseModel::none(), 0.0, &p, layout, &mut rng).is_err());
    }

    #[test]
    fn noise_variance_matches_configuration() {
        let p = pulse();
        let n0 = 2e-12;
        let layout = FrameLayout::new(0.0, 100_000.0 * p.sample_interval());
        let mut rng = frame_rng(7, 0, 0);
        let f = synthesize(&[], &DiffuseModel::none(), n0, &p, layout, &mut rng).unwrap();
        assert!(f.len() >= 100_000);
        let var = f.samples.iter().map(|s| s.norm_sqr()).sum::<f64>() / f.len() as f64;
        let expected = n0 / p.sample_interval();
        assert!((var / expected - 1.0).abs() < 0.05, "{var} vs {expected}");
    }

    #[test]
    fn frame_rng_streams_differ() {
        let a: u64 = frame_rng(1, 0, 1).gen();
        let b: u64 = frame_rng(1, 1, 0).gen();
        let c: u64 = frame_rng(1, 0, 1).gen();
        assert_ne!(a, b);
        assert_eq!(a, c);
    }
}
