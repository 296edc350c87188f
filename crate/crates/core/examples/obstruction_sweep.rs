//! All four trackers with and without the obstruction at one pulse duration.

use mint_uwb::harness::{RunFilter, Scenario, ScenarioConfig};

fn main() -> mint_uwb::Result<()> {
    let s = Scenario::new(ScenarioConfig::default())?;
    let filter = RunFilter {
        pulses: vec![0.5e-9],
        ..RunFilter::all()
    };
    let results = s.run(&filter)?;
    println!("{:10} {:>10} {:>10} {:>8}", "tracker", "clear [m]", "blocked [m]", "change");
    for r in results.iter().filter(|r| !r.obstructed) {
        let blocked = results
            .iter()
            .find(|b| b.obstructed && b.tracker == r.tracker)
            .expect("both states run");
        let (a, b) = (r.metrics.rms_error, blocked.metrics.rms_error);
        println!("{:10} {a:10.4} {b:10.4} {:+7.1}%", r.tracker.name(), 100.0 * (b - a) / a);
    }
    Ok(())
}
