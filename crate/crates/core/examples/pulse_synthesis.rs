//! Raised-cosine pulse and a noisy received frame with diffuse multipath.

use mint_uwb::waveform::{frame_rng, synthesize, DiffuseModel, FrameLayout, Mpc, Pulse};
use num_complex::Complex64;

fn main() -> mint_uwb::Result<()> {
    let pulse = Pulse::with_default_grid(1e-9, 0.5, 7e9)?;
    println!(
        "Tp = 1 ns, grid {:.1} ps, {} taps, -3 dB bandwidth {:.0} MHz",
        pulse.sample_interval() * 1e12,
        2 * pulse.half_len() + 1,
        pulse.minus3db_bandwidth() / 1e6
    );

    let mpcs = [
        Mpc { delay: 20e-9, amplitude: Complex64::new(1.0, 0.0), va_id: Some(0) },
        Mpc { delay: 26e-9, amplitude: Complex64::from_polar(0.5, 1.0), va_id: Some(3) },
    ];
    let diffuse = DiffuseModel { onset_delay: 20e-9, total_power: 1e-3, decay_const: 20e-9 };
    let frame = synthesize(&mpcs, &diffuse, 1e-7, &pulse, FrameLayout::new(0.0, 60e-9), &mut frame_rng(7, 0, 0))?;

    // coarse envelope relative to the peak, one row per nanosecond
    let peak = frame.samples.iter().map(|s| s.norm()).fold(0.0, f64::max);
    let step = (1e-9 / frame.sample_interval).round() as usize;
    for i in (15 * step..35 * step).step_by(step) {
        let m = frame.samples[i].norm() / peak;
        println!("{:5.1} ns {:6.3} {}", frame.delay_of(i) * 1e9, m, "#".repeat((m * 50.0) as usize));
    }
    Ok(())
}
