//! Position error bound on a grid over the corridor.

use mint_uwb::geometry::Point2D;
use mint_uwb::harness::{crlb_at, Scenario, ScenarioConfig};

fn main() -> mint_uwb::Result<()> {
    let config = ScenarioConfig::default();
    let pulse = config.pulse(config.pulse_index(0.5e-9).expect("configured"))?;
    let s = Scenario::new(config)?;
    let c = &s.config;
    println!("sqrt(CRLB) in mm, Tp = 0.5 ns");
    for y in [4.2, 3.0, 1.8, 0.6] {
        let row: Vec<String> = (0..=12)
            .map(|i| {
                let p = Point2D::new(1.5 + 2.0 * i as f64, y);
                match crlb_at(p, &s.vas, &s.plan, &c.amplitude, &c.diffuse, c.noise_psd, &pulse, None) {
                    Ok((b, _)) => format!("{:6.1}", b.rms() * 1e3),
                    Err(_) => format!("{:>6}", "-"),
                }
            })
            .collect();
        println!("y={y:.1} {}", row.join(""));
    }
    Ok(())
}
