//! From a transfer function on a frequency grid to extracted path lengths.

use mint_uwb::estimation::{extract_mpcs, noise_threshold};
use mint_uwb::waveform::{band_extract, synthesize_frequency_response, Mpc, Pulse};
use mint_uwb::SPEED_OF_LIGHT;
use num_complex::Complex64;

fn main() -> mint_uwb::Result<()> {
    let pulse = Pulse::with_default_grid(0.5e-9, 0.5, 7e9)?;
    let paths = [(4.2, 1.0), (7.9, 0.6), (11.3, 0.35)];
    let mpcs: Vec<Mpc> = paths
        .iter()
        .map(|&(d, a)| Mpc { delay: d / SPEED_OF_LIGHT, amplitude: Complex64::new(a, 0.0), va_id: None })
        .collect();

    // 3 to 11 GHz in 5 MHz steps: 200 ns unambiguous delay
    let h = synthesize_frequency_response(&mpcs, 3e9, 5e6, 1601);
    let frame = band_extract(&h, &pulse)?;
    let threshold = noise_threshold(&frame, 0.1, 10e-9)?;
    let est = extract_mpcs(&frame, &pulse, 20, threshold);
    for (d, a) in est.distances().iter().zip(&est.amplitudes) {
        println!("{d:7.3} m  |a| {:.3}", a.norm());
    }
    Ok(())
}
