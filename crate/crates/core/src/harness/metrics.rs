use serde::{Deserialize, Serialize};

use crate::bounds::hdop;
use crate::error::{MintError, Result};
use crate::geometry::Point2D;

/// Grid of the reported ranging-error CDFs: 0 to 2 m in 1 cm steps.
pub fn default_cdf_grid() -> Vec<f64> {
    (0..=200).map(|i| i as f64 * 0.01).collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PositionMetrics {
    pub index: usize,
    pub truth: Point2D,
    pub estimate: Point2D,
    pub error: f64,
    /// `None` when no observation was used or all were exact.
    pub hdop: Option<f64>,
    /// Observations used per base station.
    pub associated: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsRecord {
    pub positions: Vec<PositionMetrics>,
    pub rms_error: f64,
    /// Mean over positions with a defined HDOP.
    pub mean_hdop: Option<f64>,
    /// Mean number of observations per position, summed over base stations.
    pub mean_associated: f64,
    /// Signed ranging errors of all used observations, m.
    pub ranging_errors: Vec<f64>,
    /// `(grid point, CDF of |ranging error|)`.
    pub ranging_cdf: Vec<(f64, f64)>,
}

/// Fraction of `errors` not exceeding each grid point.
pub fn ranging_error_cdf(errors: &[f64], grid: &[f64]) -> Result<Vec<f64>> {
    if errors.is_empty() {
        return Err(MintError::Empty("ranging errors"));
    }
    if grid.windows(2).any(|w| w[1] < w[0]) {
        return Err(MintError::invalid("grid", "must be ascending"));
    }
    let mut sorted = errors.to_vec();
    sorted.sort_by(f64::total_cmp);
    let n = sorted.len() as f64;
    Ok(grid
        .iter()
        .map(|&g| sorted.partition_point(|&e| e <= g) as f64 / n)
        .collect())
}

pub fn rms(values: &[f64]) -> f64 {
    if values.is_empty() {
        return 0.0;
    }
    (values.iter().map(|v| v * v).sum::<f64>() / values.len() as f64).sqrt()
}

/// Accumulates per-position results of one tracker run.
#[derive(Debug, Default)]
pub struct MetricsBuilder {
    positions: Vec<PositionMetrics>,
    ranging_errors: Vec<f64>,
}

impl MetricsBuilder {
    pub fn new() -> Self {
        Self::default()
    }

    /// Records one position; `ranging_errors` are the errors of the
    /// observations used there.
    pub fn push(
        &mut self,
        index: usize,
        truth: Point2D,
        estimate: Point2D,
        ranging_errors: &[f64],
        associated: Vec<usize>,
    ) {
        let error = truth.distance(estimate);
        let hdop = if ranging_errors.is_empty() {
            None
        } else {
            hdop(error, rms(ranging_errors))
        };
        self.ranging_errors.extend_from_slice(ranging_errors);
        self.positions.push(PositionMetrics {
            index,
            truth,
            estimate,
            error,
            hdop,
            associated,
        });
    }

    pub fn finish(self, cdf_grid: &[f64]) -> MetricsRecord {
        let errors: Vec<f64> = self.positions.iter().map(|p| p.error).collect();
        let hdops: Vec<f64> = self.positions.iter().filter_map(|p| p.hdop).collect();
        let n = self.positions.len().max(1) as f64;
        let mean_associated =
            self.positions.iter().map(|p| p.associated.iter().sum::<usize>()).sum::<usize>() as f64 / n;
        let abs: Vec<f64> = self.ranging_errors.iter().map(|e| e.abs()).collect();
        let ranging_cdf = ranging_error_cdf(&abs, cdf_grid)
            .map(|c| cdf_grid.iter().copied().zip(c).collect())
            .unwrap_or_default();
        MetricsRecord {
            rms_error: rms(&errors),
            mean_hdop: (!hdops.is_empty()).then(|| hdops.iter().sum::<f64>() / hdops.len() as f64),
            mean_associated,
            ranging_errors: self.ranging_errors,
            ranging_cdf,
            positions: self.positions,
        }
    }
}
