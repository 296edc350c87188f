//! Floor plans, virtual anchors and ray-traced visibility.
//!
//! A reflected path from a base station to an agent behaves like a direct path
//! from a mirror image of the base station, a *virtual anchor* (VA). Mirroring
//! the base station across walls, and the images again across walls, yields the
//! VA set of a floor plan. Whether a VA contributes at a given position is
//! decided by unfolding the reflection sequence and checking every leg against
//! the plan.

mod plan_file;

pub use plan_file::{read_plan, write_plan, PlanFile};

use std::f64::consts::PI;
use std::ops::{Add, Mul, Sub};

use serde::{Deserialize, Serialize};

use crate::error::{MintError, Result};

/// Reflection points closer than this to a wall endpoint are treated as misses.
pub const ENDPOINT_TOLERANCE: f64 = 1e-9;
/// VAs closer than this are considered duplicates.
pub const DEDUP_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(from = "[f64; 2]", into = "[f64; 2]")]
pub struct Point2D {
    pub x: f64,
    pub y: f64,
}

impl Point2D {
    pub const fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    pub fn dot(self, other: Self) -> f64 {
        self.x * other.x + self.y * other.y
    }

    /// z-component of the 2D cross product.
    pub fn cross(self, other: Self) -> f64 {
        self.x * other.y - self.y * other.x
    }

    pub fn norm(self) -> f64 {
        self.x.hypot(self.y)
    }

    pub fn distance(self, other: Self) -> f64 {
        (self - other).norm()
    }

    pub fn is_finite(self) -> bool {
        self.x.is_finite() && self.y.is_finite()
    }
}

impl From<[f64; 2]> for Point2D {
    fn from([x, y]: [f64; 2]) -> Self {
        Point2D::new(x, y)
    }
}

impl From<Point2D> for [f64; 2] {
    fn from(p: Point2D) -> Self {
        [p.x, p.y]
    }
}

impl Add for Point2D {
    type Output = Point2D;
    fn add(self, rhs: Self) -> Self {
        Point2D::new(self.x + rhs.x, self.y + rhs.y)
    }
}

impl Sub for Point2D {
    type Output = Point2D;
    fn sub(self, rhs: Self) -> Self {
        Point2D::new(self.x - rhs.x, self.y - rhs.y)
    }
}

impl Mul<f64> for Point2D {
    type Output = Point2D;
    fn mul(self, rhs: f64) -> Self {
        Point2D::new(self.x * rhs, self.y * rhs)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WallSegment {
    pub endpoint_a: Point2D,
    pub endpoint_b: Point2D,
    pub reflective: bool,
}

impl WallSegment {
    pub fn new(endpoint_a: Point2D, endpoint_b: Point2D, reflective: bool) -> Result<Self> {
        let wall = Self {
            endpoint_a,
            endpoint_b,
            reflective,
        };
        wall.validate()?;
        Ok(wall)
    }

    /// Shorthand for a reflective wall; panics on degenerate input.
    pub fn reflective(ax: f64, ay: f64, bx: f64, by: f64) -> Self {
        Self::new(Point2D::new(ax, ay), Point2D::new(bx, by), true).expect("degenerate wall")
    }

    /// Shorthand for a blocking-only segment; panics on degenerate input.
    pub fn blocker(ax: f64, ay: f64, bx: f64, by: f64) -> Self {
        Self::new(Point2D::new(ax, ay), Point2D::new(bx, by), false).expect("degenerate wall")
    }

    pub fn validate(&self) -> Result<()> {
        if !self.endpoint_a.is_finite() || !self.endpoint_b.is_finite() {
            return Err(MintError::invalid("wall", "non-finite endpoint"));
        }
        if self.length() == 0.0 {
            return Err(MintError::DegenerateWall {
                x: self.endpoint_a.x,
                y: self.endpoint_a.y,
            });
        }
        Ok(())
    }

    pub fn direction(&self) -> Point2D {
        self.endpoint_b - self.endpoint_a
    }

    pub fn length(&self) -> f64 {
        self.direction().norm()
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct FloorPlan {
    pub walls: Vec<WallSegment>,
    /// Blocking-only segments; never mirrored.
    pub obstructions: Vec<WallSegment>,
}

impl FloorPlan {
    pub fn new(walls: Vec<WallSegment>, obstructions: Vec<WallSegment>) -> Result<Self> {
        let plan = Self {
            walls,
            obstructions,
        };
        plan.validate()?;
        Ok(plan)
    }

    pub fn validate(&self) -> Result<()> {
        for w in self.walls.iter().chain(&self.obstructions) {
            w.validate()?;
        }
        Ok(())
    }

    /// Copy of the plan without obstructions, i.e. the tracker's knowledge.
    pub fn without_obstructions(&self) -> FloorPlan {
        FloorPlan {
            walls: self.walls.clone(),
            obstructions: Vec::new(),
        }
    }

    /// Axis-aligned bounding box `(min, max)` over all segments.
    pub fn bounding_box(&self) -> Option<(Point2D, Point2D)> {
        let mut pts = self
            .walls
            .iter()
            .chain(&self.obstructions)
            .flat_map(|w| [w.endpoint_a, w.endpoint_b]);
        let first = pts.next()?;
        let (mut lo, mut hi) = (first, first);
        for p in pts {
            lo = Point2D::new(lo.x.min(p.x), lo.y.min(p.y));
            hi = Point2D::new(hi.x.max(p.x), hi.y.max(p.y));
        }
        Some((lo, hi))
    }

    fn blocking_segments(&self) -> impl Iterator<Item = (SegmentRef, &WallSegment)> {
        self.walls
            .iter()
            .enumerate()
            .map(|(i, w)| (SegmentRef::Wall(i), w))
            .chain(
                self.obstructions
                    .iter()
                    .enumerate()
                    .map(|(i, w)| (SegmentRef::Obstruction(i), w)),
            )
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum SegmentRef {
    Wall(usize),
    Obstruction(usize),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VirtualAnchor {
    pub id: usize,
    pub bs_id: usize,
    pub position: Point2D,
    pub order: usize,
    /// Wall indices in the order the mirrors were applied, starting at the BS.
    pub mirror_walls: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct VisibleSet {
    pub position_index: usize,
    pub bs_id: usize,
    pub vas: Vec<VirtualAnchor>,
    pub distances: Vec<f64>,
    pub angles: Vec<f64>,
}

impl VisibleSet {
    pub fn len(&self) -> usize {
        self.vas.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vas.is_empty()
    }
}

/// Reflects `p` across the infinite line through `wall`.
pub fn mirror_point(p: Point2D, wall: &WallSegment) -> Result<Point2D> {
    wall.validate()?;
    Ok(mirror_unchecked(p, wall))
}

fn mirror_unchecked(p: Point2D, wall: &WallSegment) -> Point2D {
    let a = wall.endpoint_a;
    let d = wall.direction();
    let t = (p - a).dot(d) / d.dot(d);
    let foot = a + d * t;
    foot * 2.0 - p
}

/// Generates all VAs up to `max_order` for one base station.
///
/// Order-k anchors mirror every surviving order-(k-1) anchor across every
/// reflective wall except the one used in the preceding step. Positions that
/// coincide with an earlier anchor are dropped, so the lowest order wins.
/// Ids are assigned in generation order starting at 0 with the physical BS.
pub fn generate_vas(
    plan: &FloorPlan,
    bs: Point2D,
    bs_id: usize,
    max_order: usize,
) -> Vec<VirtualAnchor> {
    let mut vas = vec![VirtualAnchor {
        id: 0,
        bs_id,
        position: bs,
        order: 0,
        mirror_walls: Vec::new(),
    }];
    let mut frontier = 0..1;
    for order in 1..=max_order {
        let mut added = Vec::new();
        for parent_idx in frontier.clone() {
            let parent = vas[parent_idx].clone();
            for (wi, wall) in plan.walls.iter().enumerate() {
                if !wall.reflective || parent.mirror_walls.last() == Some(&wi) {
                    continue;
                }
                let position = mirror_unchecked(parent.position, wall);
                let duplicate = vas
                    .iter()
                    .chain(added.iter())
                    .any(|v: &VirtualAnchor| v.position.distance(position) <= DEDUP_TOLERANCE);
                if duplicate {
                    continue;
                }
                let mut mirror_walls = parent.mirror_walls.clone();
                mirror_walls.push(wi);
                added.push(VirtualAnchor {
                    id: 0,
                    bs_id,
                    position,
                    order,
                    mirror_walls,
                });
            }
        }
        if added.is_empty() {
            break;
        }
        let start = vas.len();
        vas.extend(added);
        frontier = start..vas.len();
    }
    for (id, va) in vas.iter_mut().enumerate() {
        va.id = id;
    }
    vas
}

/// Intersection of segment `p0 -> p1` with the line of `wall`.
///
/// Returns `(t, u)` where `t` is the parameter along the segment and `u` along
/// the wall, or `None` if parallel.
fn line_intersection(p0: Point2D, p1: Point2D, wall: &WallSegment) -> Option<(f64, f64)> {
    let r = p1 - p0;
    let s = wall.direction();
    let denom = r.cross(s);
    if denom.abs() < 1e-300 {
        return None;
    }
    let q = wall.endpoint_a - p0;
    let t = q.cross(s) / denom;
    let u = q.cross(r) / denom;
    Some((t, u))
}

/// True if the open leg `p0 -> p1` crosses the closed segment `wall`.
fn leg_blocked_by(p0: Point2D, p1: Point2D, wall: &WallSegment) -> bool {
    let len = p0.distance(p1);
    if len == 0.0 {
        return false;
    }
    match line_intersection(p0, p1, wall) {
        Some((t, u)) => {
            let eps_t = 1e-12 / len;
            let eps_u = 1e-12 / wall.length();
            t > eps_t && t < 1.0 - eps_t && u >= -eps_u && u <= 1.0 + eps_u
        }
        None => false,
    }
}

/// Unfolds the reflection sequence of `va` towards `p`.
///
/// Returns the legs of the geometric path from the physical BS to `p`, or
/// `None` if some reflection point falls outside its wall segment.
pub fn unfold_path(va: &VirtualAnchor, p: Point2D, plan: &FloorPlan) -> Option<Vec<(Point2D, Point2D)>> {
    // images[j] is the source after j mirror steps; images[order] == va.position
    let mut images = Vec::with_capacity(va.order + 1);
    let bs = {
        let mut img = va.position;
        // walk back to the BS by undoing the mirrors in reverse order
        for &wi in va.mirror_walls.iter().rev() {
            img = mirror_unchecked(img, plan.walls.get(wi)?);
        }
        img
    };
    images.push(bs);
    for &wi in &va.mirror_walls {
        let prev = *images.last().unwrap();
        images.push(mirror_unchecked(prev, &plan.walls[wi]));
    }
    // trace back from the agent: target starts at p, each reflection point becomes the next target
    let mut points = vec![p];
    let mut target = p;
    for (step, &wi) in va.mirror_walls.iter().enumerate().rev() {
        let wall = &plan.walls[wi];
        let image = images[step + 1];
        let (t, u) = line_intersection(image, target, wall)?;
        let tol_u = ENDPOINT_TOLERANCE / wall.length();
        if !(t > 0.0 && t < 1.0) || u <= tol_u || u >= 1.0 - tol_u {
            return None;
        }
        let reflection = image + (target - image) * t;
        points.push(reflection);
        target = reflection;
    }
    points.push(bs);
    points.reverse();
    Some(points.windows(2).map(|w| (w[0], w[1])).collect())
}

/// Geometric visibility of `va` at `p`.
///
/// The path is unfolded through its mirror walls; every reflection point must
/// lie strictly inside its wall and no leg may cross any other wall or
/// obstruction of `plan`.
pub fn is_visible(va: &VirtualAnchor, p: Point2D, plan: &FloorPlan) -> bool {
    let Some(legs) = unfold_path(va, p, plan) else {
        return false;
    };
    for (leg_idx, &(a, b)) in legs.iter().enumerate() {
        // walls touched at the leg's endpoints
        let start_wall = leg_idx.checked_sub(1).map(|i| va.mirror_walls[i]);
        let end_wall = va.mirror_walls.get(leg_idx).copied();
        for (seg, wall) in plan.blocking_segments() {
            if let SegmentRef::Wall(i) = seg {
                if Some(i) == start_wall || Some(i) == end_wall {
                    continue;
                }
            }
            if leg_blocked_by(a, b, wall) {
                return false;
            }
        }
    }
    true
}

/// True if any leg of the (visible) path of `va` to `p` crosses one of `segments`.
pub fn path_crosses(
    va: &VirtualAnchor,
    p: Point2D,
    plan: &FloorPlan,
    segments: &[WallSegment],
) -> bool {
    match unfold_path(va, p, plan) {
        Some(legs) => legs
            .iter()
            .any(|&(a, b)| segments.iter().any(|s| leg_blocked_by(a, b, s))),
        None => false,
    }
}

/// Angle of the vector `p - from` in `[-pi, pi)`; zero for coincident points.
pub fn bearing(from: Point2D, p: Point2D) -> f64 {
    let d = p - from;
    if d.norm() < 1e-12 {
        return 0.0;
    }
    let phi = d.y.atan2(d.x);
    if phi >= PI {
        phi - 2.0 * PI
    } else {
        phi
    }
}

/// Filters `all_vas` by visibility at `p` and attaches distances and angles.
pub fn expected_visible_set(
    p: Point2D,
    position_index: usize,
    all_vas: &[VirtualAnchor],
    plan: &FloorPlan,
) -> VisibleSet {
    let vas: Vec<VirtualAnchor> = all_vas
        .iter()
        .filter(|va| is_visible(va, p, plan))
        .cloned()
        .collect();
    let distances = vas.iter().map(|va| va.position.distance(p)).collect();
    let angles = vas.iter().map(|va| bearing(va.position, p)).collect();
    VisibleSet {
        position_index,
        bs_id: all_vas.first().map_or(0, |va| va.bs_id),
        vas,
        distances,
        angles,
    }
}
