//! Constant-velocity extended Kalman filter with range observations.
//!
//! The conventional tracker feeds one range per base station into the update.
//! The multipath-assisted tracker extracts all paths of every frame,
//! associates them with the virtual anchors expected at the predicted (or
//! true) position and stacks every associated `(anchor, distance)` pair into a
//! single update.

use nalgebra::{DMatrix, DVector, Matrix2x4, Matrix4, Matrix4x2, Vector4};
use serde::{Deserialize, Serialize};

use crate::association::{associate_at, Correspondences, PositionSource};
use crate::error::{MintError, Result};
use crate::estimation::{
    extract_mpcs, jbsf_range, ml_range, noise_threshold, MpcEstimateSet, RangingMethod,
    DEFAULT_GAMMA, DEFAULT_K_MAX, DEFAULT_PRELOS_WINDOW, DEFAULT_SEARCHBACK,
};
use crate::geometry::{FloorPlan, Point2D, VirtualAnchor};
use crate::waveform::{Pulse, SignalFrame};

/// Anchors closer than this to the predicted position are skipped in updates.
pub const MIN_ANCHOR_DISTANCE: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrackerState {
    /// `[p_x, p_y, v_x, v_y]`.
    pub mean: Vector4<f64>,
    pub covariance: Matrix4<f64>,
}

impl TrackerState {
    pub fn new(position: Point2D, velocity: Point2D, covariance: Matrix4<f64>) -> Self {
        Self {
            mean: Vector4::new(position.x, position.y, velocity.x, velocity.y),
            covariance,
        }
    }

    /// Known position, zero velocity, with diagonal prior variances.
    pub fn at_rest(position: Point2D, position_var: f64, velocity_var: f64) -> Self {
        let covariance =
            Matrix4::from_diagonal(&Vector4::new(position_var, position_var, velocity_var, velocity_var));
        Self::new(position, Point2D::default(), covariance)
    }

    pub fn position(&self) -> Point2D {
        Point2D::new(self.mean[0], self.mean[1])
    }

    pub fn velocity(&self) -> Point2D {
        Point2D::new(self.mean[2], self.mean[3])
    }

    fn symmetrized(mut self) -> Self {
        self.covariance = (self.covariance + self.covariance.transpose()) * 0.5;
        self
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MotionModel {
    pub dt: f64,
    pub sigma_a2: f64,
    pub f: Matrix4<f64>,
    pub g: Matrix4x2<f64>,
    pub q: Matrix4<f64>,
}

impl MotionModel {
    pub fn new(dt: f64, sigma_a2: f64) -> Result<Self> {
        if !(dt > 0.0) || !dt.is_finite() {
            return Err(MintError::invalid("dt", format!("{dt} must be positive")));
        }
        if !(sigma_a2 >= 0.0) || !sigma_a2.is_finite() {
            return Err(MintError::invalid("sigma_a2", format!("{sigma_a2} must be non-negative")));
        }
        let mut f = Matrix4::identity();
        f[(0, 2)] = dt;
        f[(1, 3)] = dt;
        let h = 0.5 * dt * dt;
        let g = Matrix4x2::new(h, 0.0, 0.0, h, dt, 0.0, 0.0, dt);
        let q = g * g.transpose() * sigma_a2;
        Ok(Self {
            dt,
            sigma_a2,
            f,
            g,
            q,
        })
    }

    pub fn from_vmax(dt: f64, v_max: f64) -> Result<Self> {
        Self::new(dt, sigma_a_from_vmax(v_max, dt)?)
    }
}

/// Acceleration noise variance whose 3-sigma velocity change per step is `v_max`.
pub fn sigma_a_from_vmax(v_max: f64, dt: f64) -> Result<f64> {
    if !(dt > 0.0) {
        return Err(MintError::invalid("dt", format!("{dt} must be positive")));
    }
    Ok((v_max / (3.0 * dt)).powi(2))
}

#[derive(Debug, Clone, PartialEq)]
pub struct ObservationBatch {
    pub anchors: Vec<Point2D>,
    pub distances: Vec<f64>,
    pub noise_var: f64,
}

impl ObservationBatch {
    pub fn new(anchors: Vec<Point2D>, distances: Vec<f64>, noise_var: f64) -> Result<Self> {
        if anchors.is_empty() {
            return Err(MintError::Empty("observation batch"));
        }
        if anchors.len() != distances.len() {
            return Err(MintError::invalid(
                "distances",
                format!("{} anchors but {} distances", anchors.len(), distances.len()),
            ));
        }
        if !(noise_var > 0.0) {
            return Err(MintError::invalid("noise_var", format!("{noise_var} must be positive")));
        }
        Ok(Self {
            anchors,
            distances,
            noise_var,
        })
    }

    pub fn len(&self) -> usize {
        self.anchors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.anchors.is_empty()
    }
}

pub fn predict(state: &TrackerState, model: &MotionModel) -> TrackerState {
    TrackerState {
        mean: model.f * state.mean,
        covariance: model.f * state.covariance * model.f.transpose() + model.q,
    }
    .symmetrized()
}

#[derive(Debug, Clone, PartialEq)]
pub struct UpdateOutcome {
    pub state: TrackerState,
    /// Batch rows left out because their anchor coincides with the position.
    pub skipped: Vec<usize>,
}

/// EKF update with `h_j(x) = |p - a_j|` and `R = noise_var * I`, Joseph form.
pub fn update(state: &TrackerState, batch: &ObservationBatch) -> UpdateOutcome {
    let p = state.position();
    let mut skipped = Vec::new();
    let mut rows = Vec::with_capacity(batch.len());
    for (j, (&a, &z)) in batch.anchors.iter().zip(&batch.distances).enumerate() {
        let d = p.distance(a);
        if d <= MIN_ANCHOR_DISTANCE {
            skipped.push(j);
        } else {
            rows.push((a, z, d));
        }
    }
    if rows.is_empty() {
        return UpdateOutcome {
            state: *state,
            skipped,
        };
    }
    let m = rows.len();
    let mut h = DMatrix::zeros(m, 4);
    let mut innovation = DVector::zeros(m);
    for (r, &(a, z, d)) in rows.iter().enumerate() {
        h[(r, 0)] = (p.x - a.x) / d;
        h[(r, 1)] = (p.y - a.y) / d;
        innovation[r] = z - d;
    }
    let cov = DMatrix::from_iterator(4, 4, state.covariance.iter().copied());
    let r_mat = DMatrix::identity(m, m) * batch.noise_var;
    let s = &h * &cov * h.transpose() + &r_mat;
    let Some(s_inv) = s.clone().cholesky().map(|c| c.inverse()).or_else(|| s.try_inverse()) else {
        return UpdateOutcome {
            state: *state,
            skipped,
        };
    };
    let gain = &cov * h.transpose() * s_inv;
    let dx = &gain * innovation;
    let i_kh = DMatrix::identity(4, 4) - &gain * &h;
    let new_cov = &i_kh * &cov * i_kh.transpose() + &gain * r_mat * gain.transpose();
    UpdateOutcome {
        state: TrackerState {
            mean: state.mean + Vector4::from_iterator(dx.iter().copied()),
            covariance: Matrix4::from_iterator(new_cov.iter().copied()),
        }
        .symmetrized(),
        skipped,
    }
}

/// Position block of the covariance.
pub fn position_covariance(state: &TrackerState) -> nalgebra::Matrix2<f64> {
    let sel = Matrix2x4::new(1.0, 0.0, 0.0, 0.0, 0.0, 1.0, 0.0, 0.0);
    sel * state.covariance * sel.transpose()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EstimatorConfig {
    pub gamma: f64,
    pub k_max: usize,
    pub prelos_window: f64,
    pub xi: f64,
    pub searchback: f64,
    pub sigma_z2: f64,
    pub cutoff: f64,
}

impl Default for EstimatorConfig {
    fn default() -> Self {
        Self {
            gamma: DEFAULT_GAMMA,
            k_max: DEFAULT_K_MAX,
            prelos_window: DEFAULT_PRELOS_WINDOW,
            xi: 0.3,
            searchback: DEFAULT_SEARCHBACK,
            sigma_z2: 0.04,
            cutoff: 0.5,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum DaMode {
    /// Association at the EKF prediction.
    Da,
    /// Genie-aided association at the true position.
    Gada,
}

#[derive(Debug, Clone, PartialEq)]
pub struct StepOutcome {
    pub state: TrackerState,
    /// Observations used in the update; `None` for a prediction-only step.
    pub batch: Option<ObservationBatch>,
    /// Per-BS association (multipath-assisted steps only).
    pub correspondences: Vec<Correspondences>,
}

/// Extraction with the relative noise threshold of `config`.
pub fn extract_with_threshold(
    frame: &SignalFrame,
    pulse: &Pulse,
    config: &EstimatorConfig,
) -> Result<MpcEstimateSet> {
    let threshold = noise_threshold(frame, config.gamma, config.prelos_window)?;
    Ok(extract_mpcs(frame, pulse, config.k_max, threshold))
}

/// Conventional step from precomputed ranges; `None` marks an outage.
pub fn step_with_ranges(
    state: &TrackerState,
    model: &MotionModel,
    bs_positions: &[Point2D],
    ranges: &[Option<f64>],
    sigma_z2: f64,
) -> Result<StepOutcome> {
    let predicted = predict(state, model);
    let (anchors, distances): (Vec<Point2D>, Vec<f64>) = bs_positions
        .iter()
        .zip(ranges)
        .filter_map(|(&a, r)| r.map(|d| (a, d)))
        .unzip();
    finish_step(predicted, anchors, distances, sigma_z2, Vec::new())
}

fn finish_step(
    predicted: TrackerState,
    anchors: Vec<Point2D>,
    distances: Vec<f64>,
    sigma_z2: f64,
    correspondences: Vec<Correspondences>,
) -> Result<StepOutcome> {
    if anchors.is_empty() {
        return Ok(StepOutcome {
            state: predicted,
            batch: None,
            correspondences,
        });
    }
    let batch = ObservationBatch::new(anchors, distances, sigma_z2)?;
    let state = update(&predicted, &batch).state;
    Ok(StepOutcome {
        state,
        batch: Some(batch),
        correspondences,
    })
}

/// Predict, then update with one range per BS frame. BSs whose ranging
/// fails are dropped.
pub fn step_conventional(
    state: &TrackerState,
    model: &MotionModel,
    frames: &[SignalFrame],
    bs_positions: &[Point2D],
    pulse: &Pulse,
    method: RangingMethod,
    config: &EstimatorConfig,
) -> Result<StepOutcome> {
    if frames.len() != bs_positions.len() {
        return Err(MintError::invalid(
            "frames",
            format!("{} frames for {} base stations", frames.len(), bs_positions.len()),
        ));
    }
    let ranges = frames
        .iter()
        .map(|f| match method {
            RangingMethod::Ml => extract_with_threshold(f, pulse, config)
                .ok()
                .and_then(|e| ml_range(&e).ok())
                .map(|r| r.distance),
            RangingMethod::Jbsf => jbsf_range(f, config.xi, config.searchback, config.prelos_window)
                .ok()
                .map(|r| r.distance),
        })
        .collect::<Vec<_>>();
    step_with_ranges(state, model, bs_positions, &ranges, config.sigma_z2)
}

/// Multipath-assisted step from precomputed per-BS path-length sets.
///
/// `vas[i]` are the anchors of BS `i`, looked up by id.
#[allow(clippy::too_many_arguments)]
pub fn step_mint_with_distances(
    state: &TrackerState,
    model: &MotionModel,
    measured: &[Vec<f64>],
    vas: &[Vec<VirtualAnchor>],
    plan: &FloorPlan,
    mode: DaMode,
    true_position: Option<Point2D>,
    sigma_z2: f64,
    cutoff: f64,
) -> Result<StepOutcome> {
    if measured.len() != vas.len() {
        return Err(MintError::invalid(
            "measured",
            format!("{} distance sets for {} base stations", measured.len(), vas.len()),
        ));
    }
    let predicted = predict(state, model);
    let source = match (mode, true_position) {
        (DaMode::Da, _) => PositionSource::Predicted(predicted.position()),
        (DaMode::Gada, Some(p)) => PositionSource::True(p),
        (DaMode::Gada, None) => {
            return Err(MintError::invalid(
                "true_position",
                "genie-aided association needs the true position",
            ))
        }
    };
    let mut anchors = Vec::new();
    let mut distances = Vec::new();
    let mut correspondences = Vec::with_capacity(vas.len());
    for (z, bs_vas) in measured.iter().zip(vas) {
        let c = associate_at(source, bs_vas, plan, z, cutoff)?;
        for &(m, va_id) in &c.assignments {
            let va = bs_vas
                .get(va_id)
                .filter(|va| va.id == va_id)
                .or_else(|| bs_vas.iter().find(|va| va.id == va_id))
                .expect("associated VA comes from this list");
            anchors.push(va.position);
            distances.push(z[m]);
        }
        correspondences.push(c);
    }
    finish_step(predicted, anchors, distances, sigma_z2, correspondences)
}

/// Predict, extract the paths of every BS frame, associate them with the
/// VAs expected at the predicted (DA) or true (GADA) position and update
/// with all associated pairs.
#[allow(clippy::too_many_arguments)]
pub fn step_mint(
    state: &TrackerState,
    model: &MotionModel,
    frames: &[SignalFrame],
    vas: &[Vec<VirtualAnchor>],
    plan: &FloorPlan,
    pulse: &Pulse,
    config: &EstimatorConfig,
    mode: DaMode,
    true_position: Option<Point2D>,
) -> Result<StepOutcome> {
    let measured = frames
        .iter()
        .map(|f| extract_with_threshold(f, pulse, config).map(|e| e.distances()))
        .collect::<Result<Vec<_>>>()?;
    step_mint_with_distances(
        state,
        model,
        &measured,
        vas,
        plan,
        mode,
        true_position,
        config.sigma_z2,
        config.cutoff,
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn sigma_a_examples() {
        assert_relative_eq!(sigma_a_from_vmax(1.5, 0.1).unwrap(), 25.0, epsilon = 1e-12);
        assert_eq!(sigma_a_from_vmax(0.0, 0.1).unwrap(), 0.0);
        assert_eq!(sigma_a_from_vmax(3.0, 1.0).unwrap(), 1.0);
        assert!(sigma_a_from_vmax(1.0, 0.0).is_err());
    }

    #[test]
    fn model_blocks() {
        let m = MotionModel::new(0.1, 25.0).unwrap();
        assert_eq!(m.f[(0, 2)], 0.1);
        assert_eq!(m.f[(1, 3)], 0.1);
        assert_relative_eq!(m.g[(0, 0)], 0.005);
        assert_relative_eq!(m.g[(2, 0)], 0.1);
        assert_relative_eq!(m.q[(0, 0)], 25.0 * 0.005 * 0.005);
        assert_relative_eq!(m.q[(0, 2)], 25.0 * 0.005 * 0.1);
        assert_eq!(m.q[(0, 1)], 0.0);
    }

    #[test]
    fn predict_examples() {
        let m = MotionModel::new(0.1, 0.0).unwrap();
        let s = TrackerState::new(Point2D::new(0.0, 0.0), Point2D::new(1.0, 0.0), Matrix4::zeros());
        let p = predict(&s, &m);
        assert_relative_eq!(p.position().x, 0.1);
        assert_eq!(p.position().y, 0.0);

        let still = TrackerState::new(Point2D::new(2.0, 3.0), Point2D::default(), Matrix4::identity());
        assert_eq!(predict(&still, &m).mean, still.mean);

        let m = MotionModel::new(0.1, 25.0).unwrap();
        let zero = TrackerState::new(Point2D::default(), Point2D::default(), Matrix4::zeros());
        assert_eq!(predict(&zero, &m).covariance, m.q);
    }

    #[test]
    fn update_contracts_on_consistent_data() {
        let truth = Point2D::new(3.0, 4.0);
        let anchors = vec![Point2D::new(0.0, 0.0), Point2D::new(10.0, 0.0), Point2D::new(0.0, 10.0)];
        let z = anchors.iter().map(|a| a.distance(truth)).collect();
        let s = TrackerState::at_rest(Point2D::new(3.1, 3.9), 0.01, 1.0);
        let out = update(&s, &ObservationBatch::new(anchors, z, 1e-4).unwrap());
        assert!(out.state.position().distance(truth) < s.position().distance(truth));
        assert!(out.skipped.is_empty());
    }

    #[test]
    fn single_anchor_shrinks_range_direction_only() {
        let s = TrackerState::at_rest(Point2D::new(5.0, 0.0), 1.0, 1.0);
        let b = ObservationBatch::new(vec![Point2D::new(0.0, 0.0)], vec![5.0], 0.01).unwrap();
        let post = position_covariance(&update(&s, &b).state);
        let eig = post.symmetric_eigen();
        let mut pairs: Vec<(f64, f64)> = eig
            .eigenvalues
            .iter()
            .zip(eig.eigenvectors.column_iter())
            .map(|(&l, v)| (l, v[0].abs()))
            .collect();
        pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
        // small eigenvalue along x (range direction), unchanged along y
        assert_relative_eq!(pairs[0].0, 1.0 * 0.01 / 1.01, epsilon = 1e-12);
        assert_relative_eq!(pairs[0].1, 1.0, epsilon = 1e-12);
        assert_relative_eq!(pairs[1].0, 1.0, epsilon = 1e-12);
    }

    #[test]
    fn coincident_anchor_is_skipped() {
        let s = TrackerState::at_rest(Point2D::new(1.0, 1.0), 1.0, 1.0);
        let b = ObservationBatch::new(
            vec![Point2D::new(1.0, 1.0), Point2D::new(4.0, 5.0)],
            vec![0.0, 5.0],
            0.01,
        )
        .unwrap();
        let out = update(&s, &b);
        assert_eq!(out.skipped, vec![0]);
        assert!(out.state.mean.iter().all(|v| v.is_finite()));
    }

    #[test]
    fn outages_are_dropped() {
        let m = MotionModel::new(0.1, 25.0).unwrap();
        let s = TrackerState::at_rest(Point2D::new(3.0, 4.0), 0.01, 0.1);
        let bss = [
            Point2D::new(0.0, 0.0),
            Point2D::new(10.0, 0.0),
            Point2D::new(0.0, 10.0),
            Point2D::new(10.0, 10.0),
        ];
        let mut ranges: Vec<Option<f64>> = bss.iter().map(|a| Some(a.distance(s.position()))).collect();
        ranges[2] = None;
        let out = step_with_ranges(&s, &m, &bss, &ranges, 0.01).unwrap();
        assert_eq!(out.batch.unwrap().len(), 3);
        let none = step_with_ranges(&s, &m, &bss, &[None; 4], 0.01).unwrap();
        assert_eq!(none.state, predict(&s, &m));
        assert!(none.batch.is_none());
    }

    #[test]
    fn gada_requires_truth() {
        let m = MotionModel::new(0.1, 25.0).unwrap();
        let s = TrackerState::at_rest(Point2D::new(3.0, 4.0), 0.01, 0.1);
        let plan = FloorPlan::new(vec![], vec![]).unwrap();
        let r = step_mint_with_distances(&s, &m, &[], &[] as &[Vec<VirtualAnchor>], &plan, DaMode::Gada, None, 0.01, 0.3);
        assert!(r.is_err());
    }
}
