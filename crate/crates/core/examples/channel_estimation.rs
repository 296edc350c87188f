//! Path extraction and the two ranging methods on one simulated frame.

use mint_uwb::estimation::{estimate_klos, jbsf_range, ml_range};
use mint_uwb::harness::{Scenario, ScenarioConfig};
use mint_uwb::tracking::extract_with_threshold;
use mint_uwb::SPEED_OF_LIGHT;

fn main() -> mint_uwb::Result<()> {
    let config = ScenarioConfig::default();
    let p = config.pulse_index(0.5e-9).expect("configured");
    let pulse = config.pulse(p)?;
    let est_config = config.estimator(p);
    let s = Scenario::new(config)?;

    let spec = &s.frame_specs(false)?[40 * s.bs_count()];
    let frame = spec.synthesize(&pulse, s.config.noise_psd, s.config.layout(&pulse), s.config.seed)?;
    let est = extract_with_threshold(&frame, &pulse, &est_config)?;

    println!("{} specular paths simulated, {} extracted", spec.mpcs.len(), est.len());
    for (tau, a) in est.delays.iter().zip(&est.amplitudes) {
        println!("  {:8.3} m  |a| {:.2e}", tau * SPEED_OF_LIGHT, a.norm());
    }
    let truth = s.config.base_stations[0].distance(spec.agent);
    let ml = ml_range(&est)?.distance;
    let jbsf = jbsf_range(&frame, est_config.xi, est_config.searchback, est_config.prelos_window)?.distance;
    println!("true {truth:.3} m, ML {ml:.3} m, JBSF {jbsf:.3} m");
    println!("K_LOS {:.1} dB", estimate_klos(&frame, &pulse, est_config.prelos_window)?);
    Ok(())
}
