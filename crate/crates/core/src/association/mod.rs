//! Assignment of measured path lengths to expected virtual-anchor distances.
//!
//! Every expected VA distance is matched to a distinct measurement (or a
//! dummy) such that the summed cutoff metric `min(|d - z|, dc)` is minimal.
//! Matches at the cutoff are discarded; measurements left over are clutter.

pub mod munkres;

use serde::{Deserialize, Serialize};

use crate::error::{MintError, Result};
use crate::geometry::{expected_visible_set, FloorPlan, Point2D, VirtualAnchor};

/// Slack on the cutoff when deciding acceptance.
pub const CUTOFF_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub struct AssociationProblem {
    pub measured: Vec<f64>,
    /// `(va_id, distance)`.
    pub expected: Vec<(usize, f64)>,
    pub cutoff: f64,
}

impl AssociationProblem {
    pub fn new(measured: Vec<f64>, expected: Vec<(usize, f64)>, cutoff: f64) -> Result<Self> {
        if !(cutoff > 0.0) || !cutoff.is_finite() {
            return Err(MintError::invalid("cutoff", format!("{cutoff} must be positive")));
        }
        Ok(Self {
            measured,
            expected,
            cutoff,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct Correspondences {
    /// `(measurement_index, va_id)`, ordered by measurement index.
    pub assignments: Vec<(usize, usize)>,
    /// Measurement indices not assigned to any VA, ascending.
    pub clutter: Vec<usize>,
    /// Summed cutoff metric of the optimal matching, dummies included.
    pub cost: f64,
}

impl Correspondences {
    pub fn len(&self) -> usize {
        self.assignments.len()
    }

    pub fn is_empty(&self) -> bool {
        self.assignments.is_empty()
    }
}

/// Where the expected distances are computed from.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PositionSource {
    /// EKF prediction.
    Predicted(Point2D),
    /// Ground truth (genie-aided association).
    True(Point2D),
}

impl PositionSource {
    pub fn point(self) -> Point2D {
        match self {
            PositionSource::Predicted(p) | PositionSource::True(p) => p,
        }
    }
}

pub fn cutoff_metric(d: f64, z: f64, dc: f64) -> f64 {
    (d - z).abs().min(dc)
}

/// Optimal one-to-one matching of expected distances into measurements.
///
/// Measurements are padded with dummies at cost `dc` when there are fewer of
/// them than expected distances.
pub fn assign(problem: &AssociationProblem) -> Correspondences {
    let dc = problem.cutoff;
    let n_z = problem.measured.len();
    let n_d = problem.expected.len();
    let cols = n_z.max(n_d);
    let cost: Vec<Vec<f64>> = problem
        .expected
        .iter()
        .map(|&(_, d)| {
            (0..cols)
                .map(|c| {
                    problem
                        .measured
                        .get(c)
                        .map_or(dc, |&z| cutoff_metric(d, z, dc))
                })
                .collect()
        })
        .collect();
    let col_of = munkres::solve(&cost);

    let mut total = 0.0;
    let mut assignments = Vec::new();
    for (row, &col) in col_of.iter().enumerate() {
        let c = cost[row][col];
        total += c;
        if col < n_z && c < dc - CUTOFF_TOLERANCE {
            assignments.push((col, problem.expected[row].0));
        }
    }
    assignments.sort_unstable();
    let clutter = (0..n_z)
        .filter(|m| assignments.binary_search_by_key(m, |a| a.0).is_err())
        .collect();
    Correspondences {
        assignments,
        clutter,
        cost: total,
    }
}

/// Expected distances of the VAs visible from `position` in `plan` with its
/// obstructions removed, matched against the measurements `measured`.
pub fn associate_at(
    position: PositionSource,
    vas: &[VirtualAnchor],
    plan: &FloorPlan,
    measured: &[f64],
    cutoff: f64,
) -> Result<Correspondences> {
    let known = plan.without_obstructions();
    let visible = expected_visible_set(position.point(), 0, vas, &known);
    let expected = visible
        .vas
        .iter()
        .zip(&visible.distances)
        .map(|(va, &d)| (va.id, d))
        .collect();
    let problem = AssociationProblem::new(measured.to_vec(), expected, cutoff)?;
    Ok(assign(&problem))
}
