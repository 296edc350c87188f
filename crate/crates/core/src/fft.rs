//! Thin wrappers over `rustfft` with a per-thread planner.

use std::cell::RefCell;

use num_complex::Complex64;
use rustfft::FftPlanner;

use crate::waveform::Pulse;

thread_local! {
    static PLANNER: RefCell<FftPlanner<f64>> = RefCell::new(FftPlanner::new());
}

/// In-place forward transform, no scaling.
pub fn forward(buf: &mut [Complex64]) {
    PLANNER.with(|p| p.borrow_mut().plan_fft_forward(buf.len()).process(buf));
}

/// In-place inverse transform, no scaling.
pub fn inverse(buf: &mut [Complex64]) {
    PLANNER.with(|p| p.borrow_mut().plan_fft_inverse(buf.len()).process(buf));
}

/// Linear convolution of `x` with the pulse grid, centred so that output
/// sample `m` is `sum_n x[n] s((m - n) dtau)`; output has the length of `x`.
///
/// The pulse is even, so this is also the correlation of `x` with the pulse.
pub fn convolve_with_pulse(x: &[Complex64], pulse: &Pulse) -> Vec<Complex64> {
    let size = (x.len() + pulse.half_len() + 1).next_power_of_two();
    let kernel = pulse.kernel_spectrum(size);
    let mut buf = vec![Complex64::new(0.0, 0.0); size];
    buf[..x.len()].copy_from_slice(x);
    forward(&mut buf);
    for (b, k) in buf.iter_mut().zip(kernel.iter()) {
        *b *= k;
    }
    inverse(&mut buf);
    let scale = 1.0 / size as f64;
    buf.truncate(x.len());
    for b in &mut buf {
        *b *= scale;
    }
    buf
}
