use std::f64::consts::PI;

use num_complex::Complex64;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{frame_rng, synthesize, DiffuseModel, FrameLayout, Mpc, Pulse, SignalFrame, TRUNCATION};
use crate::error::{MintError, Result};
use crate::geometry::{expected_visible_set, FloorPlan, Point2D, VirtualAnchor};
use crate::SPEED_OF_LIGHT;

/// Deterministic path gain `|alpha| = g0 / d * eta^order` with uniform random phase.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AmplitudeModel {
    pub g0: f64,
    /// Amplitude factor per reflection.
    pub eta: f64,
}

impl AmplitudeModel {
    pub fn magnitude(&self, distance: f64, order: usize) -> f64 {
        let d = distance.max(0.1);
        self.g0 / d * self.eta.powi(order as i32)
    }
}

/// Diffuse multipath relative to the line-of-sight path: starts at the LOS
/// delay with total power `power_ratio * (g0 / d_los)^2`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DiffuseSpec {
    pub power_ratio: f64,
    pub decay_const: f64,
}

impl DiffuseSpec {
    pub fn model(&self, amplitude: &AmplitudeModel, los_distance: f64) -> DiffuseModel {
        let g = amplitude.magnitude(los_distance, 0);
        DiffuseModel {
            onset_delay: los_distance / SPEED_OF_LIGHT,
            total_power: self.power_ratio * g * g,
            decay_const: self.decay_const,
        }
    }
}

/// Everything needed to synthesize one frame.
#[derive(Debug, Clone, PartialEq)]
pub struct FrameSpec {
    pub position_index: usize,
    pub bs_id: usize,
    pub agent: Point2D,
    pub mpcs: Vec<Mpc>,
    pub diffuse: DiffuseModel,
}

impl FrameSpec {
    pub fn synthesize(
        &self,
        pulse: &Pulse,
        noise_psd: f64,
        layout: FrameLayout,
        seed: u64,
    ) -> Result<SignalFrame> {
        let mut rng = frame_rng(seed, self.position_index, self.bs_id);
        let mut frame = synthesize(&self.mpcs, &self.diffuse, noise_psd, pulse, layout, &mut rng)?;
        frame.position_index = self.position_index;
        frame.bs_id = self.bs_id;
        Ok(frame)
    }
}

/// Frame span with a noise-only lead of `prelos_window` before delay zero.
pub fn frame_layout_for(pulse: &Pulse, prelos_window: f64, end_delay: f64) -> FrameLayout {
    FrameLayout::new(-(prelos_window + TRUNCATION * pulse.duration()), end_delay)
}

fn phase_rng(seed: u64, position_index: usize, bs_id: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream((1 << 63) | ((position_index as u64) << 16) | bs_id as u64);
    rng
}

/// Builds the specular path list of every (position, BS) pair.
///
/// `vas[i]` holds the anchors of base station `i`. Visibility is evaluated on
/// `plan` including its obstructions. Every anchor gets a phase drawn in anchor
/// order, visible or not, so realizations stay aligned when visibility changes.
/// Paths at or beyond `end_delay` and zero-amplitude paths are omitted.
pub fn scenario_mpcs(
    plan: &FloorPlan,
    trajectory: &[Point2D],
    vas: &[Vec<VirtualAnchor>],
    amplitude: &AmplitudeModel,
    diffuse: &DiffuseSpec,
    end_delay: f64,
    seed: u64,
) -> Result<Vec<FrameSpec>> {
    if trajectory.is_empty() {
        return Err(MintError::Empty("trajectory"));
    }
    let mut specs = Vec::with_capacity(trajectory.len() * vas.len());
    for (pos_idx, &p) in trajectory.iter().enumerate() {
        for (bs_id, bs_vas) in vas.iter().enumerate() {
            let mut rng = phase_rng(seed, pos_idx, bs_id);
            let phases: Vec<f64> = bs_vas.iter().map(|_| rng.gen_range(0.0..2.0 * PI)).collect();
            let visible = expected_visible_set(p, pos_idx, bs_vas, plan);
            let mut mpcs = Vec::with_capacity(visible.len());
            for (va, &d) in visible.vas.iter().zip(&visible.distances) {
                let mag = amplitude.magnitude(d, va.order);
                let delay = d / SPEED_OF_LIGHT;
                if mag == 0.0 || delay >= end_delay {
                    continue;
                }
                let idx = bs_vas.iter().position(|v| v.id == va.id).unwrap_or(0);
                mpcs.push(Mpc {
                    delay,
                    amplitude: Complex64::from_polar(mag, phases[idx]),
                    va_id: Some(va.id),
                });
            }
            let los_distance = bs_vas.first().map_or(1.0, |bs| bs.position.distance(p));
            specs.push(FrameSpec {
                position_index: pos_idx,
                bs_id,
                agent: p,
                mpcs,
                diffuse: diffuse.model(amplitude, los_distance),
            });
        }
    }
    Ok(specs)
}

/// Synthetic received signals for every trajectory position and BS,
/// position-major. Frame `(l, i)` uses the RNG substream of `(seed, l, i)`.
#[allow(clippy::too_many_arguments)]
pub fn scenario_signals(
    plan: &FloorPlan,
    trajectory: &[Point2D],
    vas: &[Vec<VirtualAnchor>],
    pulse: &Pulse,
    diffuse: &DiffuseSpec,
    noise_psd: f64,
    amplitude: &AmplitudeModel,
    layout: FrameLayout,
    seed: u64,
) -> Result<Vec<SignalFrame>> {
    scenario_mpcs(plan, trajectory, vas, amplitude, diffuse, layout.end_delay, seed)?
        .iter()
        .map(|spec| spec.synthesize(pulse, noise_psd, layout, seed))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{generate_vas, WallSegment};

    fn room() -> FloorPlan {
        FloorPlan::new(
            vec![
                WallSegment::reflective(0.0, 0.0, 10.0, 0.0),
                WallSegment::reflective(10.0, 0.0, 10.0, 6.0),
                WallSegment::reflective(10.0, 6.0, 0.0, 6.0),
                WallSegment::reflective(0.0, 6.0, 0.0, 0.0),
            ],
            vec![],
        )
        .unwrap()
    }

    #[test]
    fn blocked_los_is_absent_from_generating_list() {
        let mut plan = room();
        let bs = Point2D::new(1.0, 3.0);
        let vas = vec![generate_vas(&plan, bs, 0, 1)];
        plan.obstructions.push(WallSegment::blocker(5.0, 2.0, 5.0, 4.0));
        let traj = [Point2D::new(8.0, 3.0), Point2D::new(8.0, 5.5)];
        let amp = AmplitudeModel { g0: 1.0, eta: 0.7 };
        let dm = DiffuseSpec {
            power_ratio: 0.0,
            decay_const: 20e-9,
        };
        let specs = scenario_mpcs(&plan, &traj, &vas, &amp, &dm, 1e-6, 1).unwrap();
        assert!(specs[0].mpcs.iter().all(|m| m.va_id != Some(0)));
        assert!(specs[1].mpcs.iter().any(|m| m.va_id == Some(0)));
    }

    #[test]
    fn zero_reflection_gain_keeps_only_los() {
        let plan = room();
        let vas = vec![generate_vas(&plan, Point2D::new(1.0, 3.0), 0, 2)];
        let amp = AmplitudeModel { g0: 1.0, eta: 0.0 };
        let dm = DiffuseSpec {
            power_ratio: 0.0,
            decay_const: 20e-9,
        };
        let specs = scenario_mpcs(&plan, &[Point2D::new(6.0, 2.0)], &vas, &amp, &dm, 1e-6, 1).unwrap();
        assert_eq!(specs[0].mpcs.len(), 1);
        assert_eq!(specs[0].mpcs[0].va_id, Some(0));
        assert!((specs[0].mpcs[0].amplitude.norm() - 1.0 / 26f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn empty_trajectory_is_an_error() {
        let dm = DiffuseSpec {
            power_ratio: 0.0,
            decay_const: 20e-9,
        };
        let amp = AmplitudeModel { g0: 1.0, eta: 0.5 };
        assert!(scenario_mpcs(&room(), &[], &[], &amp, &dm, 1e-6, 0).is_err());
    }
}
