//! Multipath-assisted tracking along the default corridor trajectory.

use mint_uwb::harness::{Scenario, ScenarioConfig};
use mint_uwb::tracking::{step_mint, DaMode, MotionModel, TrackerState};

fn main() -> mint_uwb::Result<()> {
    let config = ScenarioConfig::default();
    let p = config.pulse_index(1e-9).expect("configured");
    let pulse = config.pulse(p)?;
    let est_config = config.estimator(p);
    let s = Scenario::new(config)?;
    let c = &s.config;

    let model = MotionModel::from_vmax(c.dt, c.v_max)?;
    let mut state = TrackerState::at_rest(s.trajectory[0], c.initial_position_var, c.initial_velocity_var);
    let specs = s.frame_specs(false)?;
    let layout = c.layout(&pulse);
    let mut sum_sq = 0.0;
    for (l, &truth) in s.trajectory.iter().enumerate() {
        let frames = specs[l * s.bs_count()..(l + 1) * s.bs_count()]
            .iter()
            .map(|spec| spec.synthesize(&pulse, c.noise_psd, layout, c.seed))
            .collect::<mint_uwb::Result<Vec<_>>>()?;
        let out = step_mint(&state, &model, &frames, &s.vas, &s.plan, &pulse, &est_config, DaMode::Da, None)?;
        state = out.state;
        let err = state.position().distance(truth);
        sum_sq += err * err;
        if l % 20 == 0 {
            let used: usize = out.correspondences.iter().map(|c| c.len()).sum();
            println!("step {l:3}  error {err:.3} m  {used} associated paths");
        }
    }
    println!("RMSE {:.3} m", (sum_sq / s.trajectory.len() as f64).sqrt());
    Ok(())
}
