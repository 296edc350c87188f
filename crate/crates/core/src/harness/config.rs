use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::scenario::{default_plan, ObstructionSpec};
use crate::error::{MintError, Result};
use crate::geometry::{read_plan, FloorPlan, Point2D};
use crate::tracking::EstimatorConfig;
use crate::waveform::{AmplitudeModel, DiffuseSpec, FrameLayout, Pulse};

/// Settings that depend on the pulse duration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PulseSettings {
    pub duration: f64,
    pub center_freq: f64,
    pub sigma_z2: f64,
    pub cutoff: f64,
    pub xi: f64,
}

/// Full experiment description. Times in seconds, lengths in meters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ScenarioConfig {
    /// Floor plan file; the built-in corridor plan when absent. Relative
    /// paths are resolved against the config file's directory.
    pub plan: Option<PathBuf>,
    pub base_stations: Vec<Point2D>,
    pub waypoints: Vec<Point2D>,
    pub spacing: f64,
    pub dt: f64,
    /// Pulse durations.
    pub pulses: Vec<f64>,
    pub center_freqs: Vec<f64>,
    pub sigma_z2: Vec<f64>,
    pub cutoffs: Vec<f64>,
    pub xi: Vec<f64>,
    pub rolloff: f64,
    pub gamma: f64,
    pub k_max: usize,
    pub v_max: f64,
    pub searchback: f64,
    pub prelos_window: f64,
    pub max_order: usize,
    /// Standard deviation of the wall positions of the simulated building
    /// around the plan known to the trackers.
    pub plan_error: f64,
    pub end_delay: f64,
    pub noise_psd: f64,
    pub amplitude: AmplitudeModel,
    pub diffuse: DiffuseSpec,
    pub obstruction: ObstructionSpec,
    pub initial_position_var: f64,
    pub initial_velocity_var: f64,
    pub seed: u64,
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        Self {
            plan: None,
            base_stations: vec![
                Point2D::new(1.0, 3.5),
                Point2D::new(12.0, 0.3),
                Point2D::new(24.5, 3.8),
                Point2D::new(16.0, 3.7),
            ],
            waypoints: vec![
                Point2D::new(3.0, 1.8),
                Point2D::new(22.5, 1.8),
                Point2D::new(22.5, 4.2),
            ],
            spacing: 0.1,
            dt: 0.1,
            pulses: vec![0.2e-9, 0.5e-9, 1e-9, 2e-9, 4e-9],
            center_freqs: vec![6.85e9, 7e9, 7e9, 7e9, 7e9],
            sigma_z2: vec![0.01, 0.01, 0.04, 0.04, 0.09],
            cutoffs: vec![0.3, 0.3, 0.5, 0.5, 0.6],
            xi: vec![0.4, 0.4, 0.3, 0.3, 0.3],
            rolloff: 0.5,
            gamma: 0.1,
            k_max: 20,
            v_max: 1.5,
            searchback: 100e-9,
            prelos_window: 10e-9,
            max_order: 2,
            plan_error: 0.02,
            end_delay: 200e-9,
            noise_psd: 1e-7,
            amplitude: AmplitudeModel { g0: 1.0, eta: 0.8 },
            diffuse: DiffuseSpec {
                power_ratio: 1.0,
                decay_const: 20e-9,
            },
            obstruction: ObstructionSpec::default(),
            initial_position_var: 0.01,
            initial_velocity_var: 0.25,
            seed: 1,
        }
    }
}

fn check(ok: bool, name: &'static str, reason: impl FnOnce() -> String) -> Result<()> {
    if ok {
        Ok(())
    } else {
        Err(MintError::Config(format!("{name}: {}", reason())))
    }
}

impl ScenarioConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| MintError::Config(e.to_string()))
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    /// Reads and validates a config file.
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| MintError::io(path, e))?;
        let mut config = Self::from_toml(&text)?;
        if let (Some(plan), Some(dir)) = (&config.plan, path.parent()) {
            if plan.is_relative() {
                config.plan = Some(dir.join(plan));
            }
        }
        config.validate()?;
        Ok(config)
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.pulses.len();
        check(n > 0, "pulses", || "at least one pulse duration required".into())?;
        for (name, len) in [
            ("center_freqs", self.center_freqs.len()),
            ("sigma_z2", self.sigma_z2.len()),
            ("cutoffs", self.cutoffs.len()),
            ("xi", self.xi.len()),
        ] {
            check(len == n, name, || format!("{len} entries for {n} pulses"))?;
        }
        check(self.pulses.iter().all(|&t| t > 0.0), "pulses", || "durations must be positive".into())?;
        check(self.sigma_z2.iter().all(|&v| v > 0.0), "sigma_z2", || "must be positive".into())?;
        check(self.cutoffs.iter().all(|&v| v > 0.0), "cutoffs", || "must be positive".into())?;
        check(self.xi.iter().all(|&v| v > 0.0 && v < 1.0), "xi", || "must lie in (0, 1)".into())?;
        check(!self.base_stations.is_empty(), "base_stations", || "at least one required".into())?;
        check(self.waypoints.len() >= 2, "waypoints", || "at least two required".into())?;
        check(self.spacing > 0.0, "spacing", || "must be positive".into())?;
        check(self.dt > 0.0, "dt", || "must be positive".into())?;
        check(self.spacing / self.dt <= self.v_max, "v_max", || {
            format!(
                "walking speed {} m/s exceeds v_max {} m/s",
                self.spacing / self.dt,
                self.v_max
            )
        })?;
        check(self.gamma > 0.0 && self.gamma < 1.0, "gamma", || "must lie in (0, 1)".into())?;
        check(self.k_max >= 1, "k_max", || "must be at least 1".into())?;
        check(self.searchback > 0.0, "searchback", || "must be positive".into())?;
        check(self.prelos_window > 0.0, "prelos_window", || "must be positive".into())?;
        check(self.plan_error >= 0.0 && self.plan_error.is_finite(), "plan_error", || {
            "must be finite and non-negative".into()
        })?;
        check(self.end_delay > 0.0, "end_delay", || "must be positive".into())?;
        check(self.noise_psd >= 0.0, "noise_psd", || "must be non-negative".into())?;
        check(self.amplitude.g0 > 0.0 && self.amplitude.eta >= 0.0, "amplitude", || {
            "g0 must be positive and eta non-negative".into()
        })?;
        check(
            self.diffuse.power_ratio >= 0.0 && self.diffuse.decay_const > 0.0,
            "diffuse",
            || "power_ratio must be non-negative and decay_const positive".into(),
        )?;
        check(self.obstruction.attenuation_db >= 0.0, "obstruction", || {
            "attenuation must be non-negative".into()
        })?;
        check(
            self.initial_position_var > 0.0 && self.initial_velocity_var > 0.0,
            "initial variances",
            || "must be positive".into(),
        )?;
        for i in 0..n {
            self.pulse(i)?;
        }
        Ok(())
    }

    pub fn floor_plan(&self) -> Result<FloorPlan> {
        match &self.plan {
            Some(path) => Ok(read_plan(path)?.plan),
            None => Ok(default_plan()),
        }
    }

    pub fn pulse_settings(&self, i: usize) -> PulseSettings {
        PulseSettings {
            duration: self.pulses[i],
            center_freq: self.center_freqs[i],
            sigma_z2: self.sigma_z2[i],
            cutoff: self.cutoffs[i],
            xi: self.xi[i],
        }
    }

    pub fn pulse(&self, i: usize) -> Result<Pulse> {
        Pulse::with_default_grid(self.pulses[i], self.rolloff, self.center_freqs[i])
    }

    /// Index of the pulse duration closest to `duration`.
    pub fn pulse_index(&self, duration: f64) -> Option<usize> {
        self.pulses
            .iter()
            .position(|&t| (t - duration).abs() <= 1e-6 * t)
    }

    pub fn estimator(&self, i: usize) -> EstimatorConfig {
        let s = self.pulse_settings(i);
        EstimatorConfig {
            gamma: self.gamma,
            k_max: self.k_max,
            prelos_window: self.prelos_window,
            xi: s.xi,
            searchback: self.searchback,
            sigma_z2: s.sigma_z2,
            cutoff: s.cutoff,
        }
    }

    pub fn layout(&self, pulse: &Pulse) -> FrameLayout {
        crate::waveform::frame_layout_for(pulse, self.prelos_window, self.end_delay)
    }
}
