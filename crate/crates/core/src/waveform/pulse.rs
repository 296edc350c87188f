use std::collections::HashMap;
use std::f64::consts::PI;
use std::fmt;
use std::sync::{Arc, Mutex, OnceLock};

use num_complex::Complex64;

use crate::error::{MintError, Result};
use crate::fft;

/// Pulse support is truncated to `|t| <= TRUNCATION * Tp`.
pub const TRUNCATION: f64 = 8.0;
/// Oversampling of the tabulated autocorrelation relative to the sample grid.
const AUTOCORR_OVERSAMPLING: usize = 4;
/// Oversampling of the interpolation table used by the estimators.
const FINE_OVERSAMPLING: usize = 64;

/// Energy-normalized raised-cosine pulse.
///
/// The pulse is real and even. Its samples on the grid `n * dtau`,
/// `|n| <= half_len()`, carry unit energy (`sum |s|^2 * dtau == 1`).
pub struct Pulse {
    duration: f64,
    rolloff: f64,
    center_freq: f64,
    band_edge: f64,
    sample_interval: f64,
    norm: f64,
    half_len: usize,
    grid: Vec<f64>,
    fine: Vec<f64>,
    autocorr: OnceLock<Vec<f64>>,
    kernel_spectra: Mutex<HashMap<usize, Arc<Vec<Complex64>>>>,
}

impl Clone for Pulse {
    fn clone(&self) -> Self {
        Self {
            duration: self.duration,
            rolloff: self.rolloff,
            center_freq: self.center_freq,
            band_edge: self.band_edge,
            sample_interval: self.sample_interval,
            norm: self.norm,
            half_len: self.half_len,
            grid: self.grid.clone(),
            fine: self.fine.clone(),
            autocorr: self.autocorr.clone(),
            kernel_spectra: Mutex::new(HashMap::new()),
        }
    }
}

impl fmt::Debug for Pulse {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Pulse")
            .field("duration", &self.duration)
            .field("rolloff", &self.rolloff)
            .field("center_freq", &self.center_freq)
            .field("band_edge", &self.band_edge)
            .field("sample_interval", &self.sample_interval)
            .finish()
    }
}

impl PartialEq for Pulse {
    fn eq(&self, other: &Self) -> bool {
        self.duration == other.duration
            && self.rolloff == other.rolloff
            && self.center_freq == other.center_freq
            && self.band_edge == other.band_edge
            && self.sample_interval == other.sample_interval
    }
}

fn sinc(x: f64) -> f64 {
    if x.abs() < 1e-12 {
        1.0
    } else {
        (PI * x).sin() / (PI * x)
    }
}

/// Un-normalized raised cosine `sinc(t/Tp) cos(pi b t/Tp) / (1 - (2 b t/Tp)^2)`.
fn raised_cosine(t: f64, tp: f64, beta: f64) -> f64 {
    let x = t / tp;
    if beta == 0.0 {
        return sinc(x);
    }
    let q = 2.0 * beta * x;
    let denom = 1.0 - q * q;
    if denom.abs() < 1e-8 {
        // limit at t = +-Tp/(2 beta)
        PI / 4.0 * sinc(1.0 / (2.0 * beta))
    } else {
        sinc(x) * (PI * beta * x).cos() / denom
    }
}

/// Spectrum of [`raised_cosine`]; equals `tp` in the flat part of the band.
fn raised_cosine_spectrum(f: f64, tp: f64, beta: f64) -> f64 {
    let af = f.abs();
    let f1 = (1.0 - beta) / (2.0 * tp);
    let f2 = (1.0 + beta) / (2.0 * tp);
    if af <= f1 {
        tp
    } else if af <= f2 {
        tp / 2.0 * (1.0 + (PI * tp / beta * (af - f1)).cos())
    } else {
        0.0
    }
}

impl Pulse {
    /// Builds a pulse centred at `fc` with the lower band edge derived from the roll-off.
    pub fn new(duration: f64, rolloff: f64, center_freq: f64, sample_interval: f64) -> Result<Self> {
        let band_edge = center_freq - (1.0 + rolloff) / (2.0 * duration);
        make_pulse(duration, rolloff, center_freq, band_edge, sample_interval)
    }

    /// Pulse with the default grid `dtau = Tp / 16`.
    pub fn with_default_grid(duration: f64, rolloff: f64, center_freq: f64) -> Result<Self> {
        Self::new(duration, rolloff, center_freq, duration / 16.0)
    }

    pub fn duration(&self) -> f64 {
        self.duration
    }

    pub fn rolloff(&self) -> f64 {
        self.rolloff
    }

    pub fn center_freq(&self) -> f64 {
        self.center_freq
    }

    pub fn band_edge(&self) -> f64 {
        self.band_edge
    }

    pub fn sample_interval(&self) -> f64 {
        self.sample_interval
    }

    /// Two-sided occupied bandwidth `(1 + beta) / Tp`.
    pub fn occupied_bandwidth(&self) -> f64 {
        (1.0 + self.rolloff) / self.duration
    }

    /// Number of grid samples on each side of the peak.
    pub fn half_len(&self) -> usize {
        self.half_len
    }

    /// Time extent of the truncated pulse on each side of the peak.
    pub fn half_width(&self) -> f64 {
        TRUNCATION * self.duration
    }

    /// Grid samples `s(n dtau)` for `n = -half_len..=half_len`.
    pub fn grid(&self) -> &[f64] {
        &self.grid
    }

    /// Sample at grid offset `n`.
    pub fn grid_value(&self, n: isize) -> f64 {
        let idx = n + self.half_len as isize;
        if idx < 0 || idx as usize >= self.grid.len() {
            0.0
        } else {
            self.grid[idx as usize]
        }
    }

    /// Continuous-time value, zero outside the truncation window.
    pub fn value(&self, t: f64) -> f64 {
        if t.abs() > self.half_width() {
            return 0.0;
        }
        self.norm * raised_cosine(t, self.duration, self.rolloff)
    }

    /// Table-interpolated [`Pulse::value`]; relative error below 1e-6.
    pub fn value_interp(&self, t: f64) -> f64 {
        let step = self.sample_interval / FINE_OVERSAMPLING as f64;
        let x = t / step + (self.fine.len() / 2) as f64;
        if x < 0.0 {
            return 0.0;
        }
        let i = x as usize;
        if i + 1 >= self.fine.len() {
            return 0.0;
        }
        let f = x - i as f64;
        self.fine[i] + f * (self.fine[i + 1] - self.fine[i])
    }

    /// Baseband spectrum of the (untruncated) normalized pulse.
    pub fn spectrum(&self, f: f64) -> f64 {
        self.norm * raised_cosine_spectrum(f, self.duration, self.rolloff)
    }

    /// Discrete energy `sum |s|^2 dtau`.
    pub fn energy(&self) -> f64 {
        self.grid.iter().map(|v| v * v).sum::<f64>() * self.sample_interval
    }

    /// Autocorrelation `R(u) = sum_n s(n dtau) s(n dtau - u) dtau`, interpolated from a table.
    pub fn autocorrelation(&self, u: f64) -> f64 {
        let table = self.autocorr.get_or_init(|| self.build_autocorrelation());
        let step = self.sample_interval / AUTOCORR_OVERSAMPLING as f64;
        let center = (table.len() / 2) as f64;
        let x = u / step + center;
        if x < 1.0 || x > table.len() as f64 - 3.0 {
            return 0.0;
        }
        let i = x.floor() as usize;
        let f = x - i as f64;
        // Catmull-Rom
        let (p0, p1, p2, p3) = (table[i - 1], table[i], table[i + 1], table[i + 2]);
        p1 + 0.5
            * f
            * (p2 - p0 + f * (2.0 * p0 - 5.0 * p1 + 4.0 * p2 - p3 + f * (3.0 * (p1 - p2) + p3 - p0)))
    }

    fn build_autocorrelation(&self) -> Vec<f64> {
        let lags = 2 * self.half_len * AUTOCORR_OVERSAMPLING + 2;
        let step = self.sample_interval / AUTOCORR_OVERSAMPLING as f64;
        let h = self.half_len as isize;
        (-(lags as isize)..=lags as isize)
            .map(|j| {
                let u = j as f64 * step;
                (-h..=h)
                    .map(|n| {
                        let t = n as f64 * self.sample_interval;
                        self.grid_value(n) * self.value_interp(t - u)
                    })
                    .sum::<f64>()
                    * self.sample_interval
            })
            .collect()
    }

    /// Cached FFT of the grid samples, zero-padded to `size` with the peak at index 0.
    pub(crate) fn kernel_spectrum(&self, size: usize) -> Arc<Vec<Complex64>> {
        let mut cache = self.kernel_spectra.lock().expect("poisoned");
        cache
            .entry(size)
            .or_insert_with(|| {
                let mut buf = vec![Complex64::new(0.0, 0.0); size];
                let h = self.half_len as isize;
                for n in -h..=h {
                    let idx = n.rem_euclid(size as isize) as usize;
                    buf[idx] += self.grid_value(n);
                }
                fft::forward(&mut buf);
                Arc::new(buf)
            })
            .clone()
    }

    /// Width where the amplitude spectrum of the discretized pulse falls 3 dB
    /// (on a 10 log10 scale) below its peak, two-sided.
    pub fn minus3db_bandwidth(&self) -> f64 {
        let level = 10f64.powf(-0.3);
        let s0 = self.dtft(0.0);
        let (mut lo, mut hi) = (0.0, self.occupied_bandwidth() / 2.0);
        for _ in 0..100 {
            let mid = 0.5 * (lo + hi);
            if self.dtft(mid) / s0 > level {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        2.0 * 0.5 * (lo + hi)
    }

    /// DTFT of the grid samples (real because the pulse is even).
    pub fn dtft(&self, f: f64) -> f64 {
        let h = self.half_len as isize;
        (-h..=h)
            .map(|n| self.grid_value(n) * (2.0 * PI * f * n as f64 * self.sample_interval).cos())
            .sum::<f64>()
            * self.sample_interval
    }
}

/// Builds an energy-normalized raised-cosine pulse.
///
/// `duration` is the pulse duration `Tp`, `rolloff` the roll-off factor,
/// `center_freq`/`band_edge` the centre and lower edge of the extracted band,
/// `sample_interval` the delay grid spacing.
pub fn make_pulse(
    duration: f64,
    rolloff: f64,
    center_freq: f64,
    band_edge: f64,
    sample_interval: f64,
) -> Result<Pulse> {
    if !(0.0..=1.0).contains(&rolloff) {
        return Err(MintError::invalid("rolloff", format!("{rolloff} not in [0, 1]")));
    }
    if !(duration > 0.0 && duration.is_finite()) {
        return Err(MintError::invalid("duration", format!("{duration} must be positive")));
    }
    if !(sample_interval > 0.0) || sample_interval > duration / 8.0 * (1.0 + 1e-12) {
        return Err(MintError::invalid(
            "sample_interval",
            format!("{sample_interval} must be in (0, Tp/8]"),
        ));
    }
    if band_edge > center_freq {
        return Err(MintError::invalid("band_edge", "lower band edge above centre frequency"));
    }
    let half_len = (TRUNCATION * duration / sample_interval + 1e-9).floor() as usize;
    let h = half_len as isize;
    let raw: Vec<f64> = (-h..=h)
        .map(|n| raised_cosine(n as f64 * sample_interval, duration, rolloff))
        .collect();
    let energy = raw.iter().map(|v| v * v).sum::<f64>() * sample_interval;
    let norm = 1.0 / energy.sqrt();
    let grid = raw.into_iter().map(|v| v * norm).collect();
    let fh = (half_len * FINE_OVERSAMPLING) as isize;
    let fine_step = sample_interval / FINE_OVERSAMPLING as f64;
    let fine = (-fh..=fh)
        .map(|n| norm * raised_cosine(n as f64 * fine_step, duration, rolloff))
        .collect();
    Ok(Pulse {
        duration,
        rolloff,
        center_freq,
        band_edge,
        sample_interval,
        norm,
        half_len,
        grid,
        fine,
        autocorr: OnceLock::new(),
        kernel_spectra: Mutex::new(HashMap::new()),
    })
}
