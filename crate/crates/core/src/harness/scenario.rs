use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::bounds::{efim, effective_bandwidth, position_crlb, sinr, MpcSinr, PositionCrlb};
use crate::error::{MintError, Result};
use crate::geometry::{
    bearing, expected_visible_set, path_crosses, FloorPlan, Point2D, VirtualAnchor, WallSegment,
};
use crate::waveform::{AmplitudeModel, DiffuseSpec, FrameSpec, Pulse, SignalFrame};

/// The built-in plan: a 25 m x 10 m floor with a solid block of rooms
/// `[4, 20] x [4, 10]`, leaving a U-shaped corridor. All walls reflect.
pub fn default_plan() -> FloorPlan {
    let w = WallSegment::reflective;
    FloorPlan::new(
        vec![
            w(0.0, 0.0, 25.0, 0.0),
            w(25.0, 0.0, 25.0, 10.0),
            w(25.0, 10.0, 20.0, 10.0),
            w(20.0, 10.0, 20.0, 4.0),
            w(20.0, 4.0, 4.0, 4.0),
            w(4.0, 4.0, 4.0, 10.0),
            w(4.0, 10.0, 0.0, 10.0),
            w(0.0, 10.0, 0.0, 0.0),
        ],
        vec![],
    )
    .expect("default plan is valid")
}

/// The building as actually built: every reflective wall of `plan` shifted
/// along its normal by an independent `N(0, std^2)` offset. Obstructions are
/// kept. Returns an exact copy when `std` is zero.
pub fn as_built_plan(plan: &FloorPlan, std: f64, seed: u64) -> Result<FloorPlan> {
    if !(std >= 0.0) || !std.is_finite() {
        return Err(MintError::invalid("plan_error", format!("{std} must be finite and non-negative")));
    }
    if std == 0.0 {
        return Ok(plan.clone());
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(1 << 62);
    let normal = Normal::new(0.0, std).expect("valid deviation");
    let mut built = plan.clone();
    for wall in built.walls.iter_mut().filter(|w| w.reflective) {
        let d = wall.direction();
        let shift = Point2D::new(-d.y, d.x) * (normal.sample(&mut rng) / d.norm());
        wall.endpoint_a = wall.endpoint_a + shift;
        wall.endpoint_b = wall.endpoint_b + shift;
    }
    Ok(built)
}

/// Points spaced `spacing` apart along the polyline through `waypoints`,
/// measured along the arc. Corners are passed through, not sampled, unless
/// they fall on the spacing grid.
pub fn build_trajectory(waypoints: &[Point2D], spacing: f64) -> Result<Vec<Point2D>> {
    if !(spacing > 0.0) {
        return Err(MintError::invalid("spacing", format!("{spacing} must be positive")));
    }
    if waypoints.is_empty() {
        return Err(MintError::Empty("waypoints"));
    }
    let mut cumulative = vec![0.0];
    for (i, w) in waypoints.windows(2).enumerate() {
        let len = w[0].distance(w[1]);
        if len < 1e-12 {
            return Err(MintError::invalid(
                "waypoints",
                format!("waypoints {i} and {} coincide", i + 1),
            ));
        }
        cumulative.push(cumulative[i] + len);
    }
    let total = *cumulative.last().unwrap();
    // tolerate rounding in total / spacing
    let count = (total / spacing + 1e-9).floor() as usize + 1;
    let mut seg = 0;
    let points = (0..count)
        .map(|k| {
            let s = k as f64 * spacing;
            while seg + 2 < cumulative.len() && s > cumulative[seg + 1] {
                seg += 1;
            }
            if seg + 1 >= cumulative.len() {
                return waypoints[0];
            }
            let (a, b) = (waypoints[seg], waypoints[seg + 1]);
            let t = ((s - cumulative[seg]) / (cumulative[seg + 1] - cumulative[seg])).min(1.0);
            a + (b - a) * t
        })
        .collect();
    Ok(points)
}

/// A change of the environment unknown to the tracker, such as a group of
/// people. Paths crossing one of the segments lose `attenuation_db` of energy.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ObstructionSpec {
    pub segments: Vec<[Point2D; 2]>,
    pub attenuation_db: f64,
}

impl Default for ObstructionSpec {
    fn default() -> Self {
        Self {
            segments: vec![[Point2D::new(12.0, 2.3), Point2D::new(12.0, 3.8)]],
            attenuation_db: 10.0,
        }
    }
}

impl ObstructionSpec {
    pub fn blockers(&self) -> Vec<WallSegment> {
        self.segments
            .iter()
            .map(|[a, b]| WallSegment::blocker(a.x, a.y, b.x, b.y))
            .collect()
    }

    /// Amplitude factor `10^(-attenuation_db / 20)`.
    pub fn amplitude_factor(&self) -> f64 {
        10f64.powf(-self.attenuation_db / 20.0)
    }

    /// Whether the path of `va` to `p` crosses the obstruction.
    pub fn blocks(&self, va: &VirtualAnchor, p: Point2D, plan: &FloorPlan) -> bool {
        path_crosses(va, p, plan, &self.blockers())
    }
}

/// Attenuates every path of `specs` that crosses the obstruction.
///
/// `vas[i]` are the anchors of BS `i`; paths refer to them by id. Phases and
/// the diffuse part are left unchanged. Returns the number of attenuated paths.
pub fn apply_obstruction(
    specs: &mut [FrameSpec],
    vas: &[Vec<VirtualAnchor>],
    plan: &FloorPlan,
    obstruction: &ObstructionSpec,
) -> usize {
    let blockers = obstruction.blockers();
    let factor = obstruction.amplitude_factor();
    let mut count = 0;
    for spec in specs {
        let Some(bs_vas) = vas.get(spec.bs_id) else {
            continue;
        };
        for mpc in &mut spec.mpcs {
            let Some(va) = mpc.va_id.and_then(|id| bs_vas.iter().find(|v| v.id == id)) else {
                continue;
            };
            if path_crosses(va, spec.agent, plan, &blockers) {
                mpc.amplitude *= factor;
                count += 1;
            }
        }
    }
    count
}

/// Replaces each `(delay, amplitude)` path in a received frame by the same
/// path with `attenuation_db` less energy and its original phase.
pub fn attenuate_paths(
    frame: &mut SignalFrame,
    pulse: &Pulse,
    paths: &[(f64, Complex64)],
    attenuation_db: f64,
) {
    let factor = 10f64.powf(-attenuation_db / 20.0);
    for &(delay, amplitude) in paths {
        frame.add_pulse(pulse, delay, amplitude * (factor - 1.0));
    }
}

/// Per-path SINRs and directions of the paths visible at `p` from one BS,
/// using ground-truth amplitudes and diffuse power.
#[allow(clippy::too_many_arguments)]
pub fn path_sinrs(
    p: Point2D,
    bs_vas: &[VirtualAnchor],
    plan: &FloorPlan,
    amplitude: &AmplitudeModel,
    diffuse: &DiffuseSpec,
    noise_psd: f64,
    tp: f64,
    obstruction: Option<&ObstructionSpec>,
) -> Result<Vec<MpcSinr>> {
    let visible = expected_visible_set(p, 0, bs_vas, plan);
    let los_distance = bs_vas.first().map_or(1.0, |bs| bs.position.distance(p));
    let dm = diffuse.model(amplitude, los_distance);
    let blockers = obstruction.map(|o| (o.blockers(), o.amplitude_factor()));
    visible
        .vas
        .iter()
        .zip(&visible.distances)
        .map(|(va, &d)| {
            let mut mag = amplitude.magnitude(d, va.order);
            if let Some((segs, factor)) = &blockers {
                if path_crosses(va, p, plan, segs) {
                    mag *= factor;
                }
            }
            let tau = d / crate::SPEED_OF_LIGHT;
            Ok(MpcSinr {
                va_id: va.id,
                sinr: sinr(Complex64::new(mag, 0.0), noise_psd, tp, dm.pdp(tau))?,
                angle: bearing(va.position, p),
            })
        })
        .collect()
}

/// Position error bound at `p` from all paths of all base stations.
#[allow(clippy::too_many_arguments)]
pub fn crlb_at(
    p: Point2D,
    vas: &[Vec<VirtualAnchor>],
    plan: &FloorPlan,
    amplitude: &AmplitudeModel,
    diffuse: &DiffuseSpec,
    noise_psd: f64,
    pulse: &Pulse,
    obstruction: Option<&ObstructionSpec>,
) -> Result<(PositionCrlb, usize)> {
    let mut all = Vec::new();
    for bs_vas in vas {
        all.extend(path_sinrs(
            p,
            bs_vas,
            plan,
            amplitude,
            diffuse,
            noise_psd,
            pulse.duration(),
            obstruction,
        )?);
    }
    let j = efim(&all, effective_bandwidth(pulse));
    Ok((position_crlb(&j)?, all.len()))
}
