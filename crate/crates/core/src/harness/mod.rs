//! Experiment orchestration: trajectory, synthetic signals, obstruction,
//! the four tracker variants and their metrics.

mod config;
mod metrics;
mod report;
mod scenario;

pub use config::{PulseSettings, ScenarioConfig};
pub use metrics::{default_cdf_grid, ranging_error_cdf, rms, MetricsBuilder, MetricsRecord, PositionMetrics};
pub use report::{write_reports, SUMMARY_FILE, TRACE_FILE, RANGING_CDF_FILE};
pub use scenario::{
    apply_obstruction, as_built_plan, attenuate_paths, build_trajectory, crlb_at, default_plan, path_sinrs,
    ObstructionSpec,
};

use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{MintError, Result};
use crate::estimation::{jbsf_range, ml_range};
use crate::geometry::{generate_vas, FloorPlan, Point2D, VirtualAnchor};
use crate::tracking::{
    extract_with_threshold, step_mint_with_distances, step_with_ranges, DaMode, MotionModel,
    TrackerState,
};
use crate::waveform::{scenario_mpcs, FrameSpec};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Tracker {
    MintDa,
    MintGada,
    EkfMl,
    EkfJbsf,
}

impl Tracker {
    pub const ALL: [Tracker; 4] = [Tracker::MintDa, Tracker::MintGada, Tracker::EkfMl, Tracker::EkfJbsf];

    pub fn name(self) -> &'static str {
        match self {
            Tracker::MintDa => "mint-da",
            Tracker::MintGada => "mint-gada",
            Tracker::EkfMl => "ekf-ml",
            Tracker::EkfJbsf => "ekf-jbsf",
        }
    }

    fn needs_extraction(self) -> bool {
        self != Tracker::EkfJbsf
    }
}

impl fmt::Display for Tracker {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Tracker {
    type Err = MintError;
    fn from_str(s: &str) -> Result<Self> {
        Tracker::ALL
            .into_iter()
            .find(|t| t.name() == s)
            .ok_or_else(|| MintError::Config(format!("unknown tracker `{s}`")))
    }
}

/// Which combinations to run. Empty lists select everything.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct RunFilter {
    pub trackers: Vec<Tracker>,
    /// Pulse durations in seconds.
    pub pulses: Vec<f64>,
    pub obstruction: Vec<bool>,
}

impl RunFilter {
    pub fn all() -> Self {
        Self::default()
    }

    fn trackers(&self) -> Vec<Tracker> {
        if self.trackers.is_empty() {
            Tracker::ALL.to_vec()
        } else {
            Tracker::ALL
                .into_iter()
                .filter(|t| self.trackers.contains(t))
                .collect()
        }
    }

    fn pulse_indices(&self, config: &ScenarioConfig) -> Result<Vec<usize>> {
        if self.pulses.is_empty() {
            return Ok((0..config.pulses.len()).collect());
        }
        let mut idx = self
            .pulses
            .iter()
            .map(|&tp| {
                config.pulse_index(tp).ok_or_else(|| {
                    MintError::Config(format!(
                        "pulse duration {} ns not configured",
                        (tp * 1e12).round() / 1e3
                    ))
                })
            })
            .collect::<Result<Vec<_>>>()?;
        idx.sort_unstable();
        idx.dedup();
        Ok(idx)
    }

    fn obstruction_states(&self) -> Vec<bool> {
        if self.obstruction.is_empty() {
            vec![false, true]
        } else {
            [false, true]
                .into_iter()
                .filter(|o| self.obstruction.contains(o))
                .collect()
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunResult {
    pub tracker: Tracker,
    pub pulse: f64,
    pub obstructed: bool,
    pub metrics: MetricsRecord,
}

/// Estimates obtained from one received frame.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct FrameEstimate {
    /// Path lengths of all extracted paths, ascending.
    pub distances: Vec<f64>,
    pub ml: Option<f64>,
    pub jbsf: Option<f64>,
}

/// A validated configuration with its plan, trajectory and anchors.
#[derive(Debug, Clone)]
pub struct Scenario {
    pub config: ScenarioConfig,
    pub plan: FloorPlan,
    pub trajectory: Vec<Point2D>,
    /// Anchors of every base station, index = BS id.
    pub vas: Vec<Vec<VirtualAnchor>>,
    /// Building used for signal synthesis; differs from `plan` by the
    /// configured wall position error.
    pub built_plan: FloorPlan,
    pub built_vas: Vec<Vec<VirtualAnchor>>,
}

impl Scenario {
    pub fn new(config: ScenarioConfig) -> Result<Self> {
        config.validate()?;
        let plan = config.floor_plan()?;
        let trajectory = build_trajectory(&config.waypoints, config.spacing)?;
        let anchors = |plan: &FloorPlan| -> Vec<Vec<VirtualAnchor>> {
            config
                .base_stations
                .iter()
                .enumerate()
                .map(|(i, &bs)| generate_vas(plan, bs, i, config.max_order))
                .collect()
        };
        let vas = anchors(&plan);
        let built_plan = as_built_plan(&plan, config.plan_error, config.seed)?;
        let built_vas = anchors(&built_plan);
        Ok(Self {
            config,
            plan,
            trajectory,
            vas,
            built_plan,
            built_vas,
        })
    }

    pub fn bs_count(&self) -> usize {
        self.config.base_stations.len()
    }

    /// Path lists of every (position, BS) pair, position-major.
    pub fn frame_specs(&self, obstructed: bool) -> Result<Vec<FrameSpec>> {
        let c = &self.config;
        let mut specs = scenario_mpcs(
            &self.built_plan,
            &self.trajectory,
            &self.built_vas,
            &c.amplitude,
            &c.diffuse,
            c.end_delay,
            c.seed,
        )?;
        if obstructed {
            apply_obstruction(&mut specs, &self.built_vas, &self.built_plan, &c.obstruction);
        }
        Ok(specs)
    }

    /// Synthesizes and processes every frame for pulse `pulse_idx`.
    pub fn frame_estimates(
        &self,
        specs: &[FrameSpec],
        pulse_idx: usize,
        extract: bool,
        jbsf: bool,
    ) -> Result<Vec<FrameEstimate>> {
        let c = &self.config;
        let pulse = c.pulse(pulse_idx)?;
        let layout = c.layout(&pulse);
        let est_config = c.estimator(pulse_idx);
        specs
            .par_iter()
            .map(|spec| {
                let frame = spec.synthesize(&pulse, c.noise_psd, layout, c.seed)?;
                let mut out = FrameEstimate::default();
                if extract {
                    let est = extract_with_threshold(&frame, &pulse, &est_config)?;
                    out.ml = ml_range(&est).ok().map(|r| r.distance);
                    out.distances = est.distances();
                }
                if jbsf {
                    out.jbsf = jbsf_range(&frame, est_config.xi, est_config.searchback, est_config.prelos_window)
                        .ok()
                        .map(|r| r.distance);
                }
                Ok(out)
            })
            .collect()
    }

    /// Runs one tracker over the whole trajectory.
    pub fn track(&self, tracker: Tracker, pulse_idx: usize, estimates: &[FrameEstimate]) -> Result<MetricsRecord> {
        let c = &self.config;
        let n_bs = self.bs_count();
        if estimates.len() != self.trajectory.len() * n_bs {
            return Err(MintError::invalid(
                "estimates",
                format!("{} estimates for {} frames", estimates.len(), self.trajectory.len() * n_bs),
            ));
        }
        let settings = c.pulse_settings(pulse_idx);
        let model = MotionModel::from_vmax(c.dt, c.v_max)?;
        let mut state = TrackerState::at_rest(self.trajectory[0], c.initial_position_var, c.initial_velocity_var);
        let mut metrics = MetricsBuilder::new();
        let known = self.plan.without_obstructions();
        for (l, &truth) in self.trajectory.iter().enumerate() {
            let frames = &estimates[l * n_bs..(l + 1) * n_bs];
            let mut errors = Vec::new();
            let mut associated = vec![0; n_bs];
            match tracker {
                Tracker::EkfMl | Tracker::EkfJbsf => {
                    let ranges: Vec<Option<f64>> = frames
                        .iter()
                        .map(|f| if tracker == Tracker::EkfMl { f.ml } else { f.jbsf })
                        .collect();
                    let out = step_with_ranges(&state, &model, &c.base_stations, &ranges, settings.sigma_z2)?;
                    for (i, (r, bs)) in ranges.iter().zip(&c.base_stations).enumerate() {
                        if let Some(r) = r {
                            errors.push(r - bs.distance(truth));
                            associated[i] = 1;
                        }
                    }
                    state = out.state;
                }
                Tracker::MintDa | Tracker::MintGada => {
                    let measured: Vec<Vec<f64>> = frames.iter().map(|f| f.distances.clone()).collect();
                    let (mode, genie) = if tracker == Tracker::MintDa {
                        (DaMode::Da, None)
                    } else {
                        (DaMode::Gada, Some(truth))
                    };
                    let out = step_mint_with_distances(
                        &state,
                        &model,
                        &measured,
                        &self.vas,
                        &known,
                        mode,
                        genie,
                        settings.sigma_z2,
                        settings.cutoff,
                    )?;
                    for (i, corr) in out.correspondences.iter().enumerate() {
                        associated[i] = corr.len();
                        for &(m, va_id) in &corr.assignments {
                            let va = self.vas[i].iter().find(|v| v.id == va_id).expect("known VA");
                            errors.push(measured[i][m] - va.position.distance(truth));
                        }
                    }
                    state = out.state;
                }
            }
            metrics.push(l, truth, state.position(), &errors, associated);
        }
        Ok(metrics.finish(&default_cdf_grid()))
    }

    /// All selected combinations, ordered by obstruction state, pulse and tracker.
    pub fn run(&self, filter: &RunFilter) -> Result<Vec<RunResult>> {
        let trackers = filter.trackers();
        let pulses = filter.pulse_indices(&self.config)?;
        let extract = trackers.iter().any(|t| t.needs_extraction());
        let jbsf = trackers.contains(&Tracker::EkfJbsf);
        let mut results = Vec::new();
        for obstructed in filter.obstruction_states() {
            let specs = self.frame_specs(obstructed)?;
            for &p in &pulses {
                let estimates = self.frame_estimates(&specs, p, extract, jbsf)?;
                let metrics = trackers
                    .par_iter()
                    .map(|&t| self.track(t, p, &estimates))
                    .collect::<Result<Vec<_>>>()?;
                results.extend(trackers.iter().zip(metrics).map(|(&tracker, metrics)| RunResult {
                    tracker,
                    pulse: self.config.pulses[p],
                    obstructed,
                    metrics,
                }));
            }
        }
        Ok(results)
    }
}

/// Validates `config` and runs the selected combinations.
pub fn run_scenario(config: &ScenarioConfig, filter: &RunFilter) -> Result<Vec<RunResult>> {
    Scenario::new(config.clone())?.run(filter)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tracker_names_round_trip() {
        for t in Tracker::ALL {
            assert_eq!(t.name().parse::<Tracker>().unwrap(), t);
        }
        assert!("ekf".parse::<Tracker>().is_err());
    }

    #[test]
    fn filter_selects_configured_pulses() {
        let c = ScenarioConfig::default();
        let f = RunFilter {
            pulses: vec![1e-9, 0.2e-9],
            ..RunFilter::default()
        };
        assert_eq!(f.pulse_indices(&c).unwrap(), vec![0, 2]);
        let bad = RunFilter {
            pulses: vec![3e-9],
            ..RunFilter::default()
        };
        assert!(bad.pulse_indices(&c).is_err());
    }
}
