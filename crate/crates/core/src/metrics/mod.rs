//! Explanation-quality metrics and fold-level statistics.

mod latency;
mod perturbation;
mod report;
mod stats;

pub use latency::{latency_profile, LatencyStats};
pub use perturbation::{
    aup, default_fraction_grid, perturbation_curve, perturbation_curve_abs, PerturbationCurve,
};
pub use report::{
    compare_methods, metrics_to_csv, write_metrics_csv, AggregateCell, AttributionMethod,
    CompareSpec, MetricsReport, MetricsRow, MetricsSummary,
};
pub use stats::paired_ttest;

use crate::attribution::AttributionMap;
use crate::data::{COORDS, JOINT_COUNT};
use crate::error::{Result, TshapError};

/// Temporal variance: mean squared Euclidean distance between consecutive
/// attribution rows, `TV = (1/(T−1)) Σ_{t=2..T} ‖A_t − A_{t−1}‖²`.
/// Lower values mean smoother, more temporally consistent attributions.
pub fn temporal_variance(map: &AttributionMap) -> Result<f64> {
    let t_len = map.len();
    if t_len < 2 {
        return Err(TshapError::UndefinedMetric(
            "temporal variance needs at least two frames".into(),
        ));
    }
    let mut total = 0.0;
    for t in 1..t_len {
        let prev = map.values.row(t - 1);
        let cur = map.values.row(t);
        for (a, b) in cur.iter().zip(prev) {
            let d = a - b;
            total += d * d;
        }
    }
    Ok(total / (t_len - 1) as f64)
}

/// Mean absolute attribution mass per joint: for joint j, the mean over
/// frames of the summed |value| of its three coordinates. Grouped maps
/// first split each group score evenly over member features.
pub fn per_joint_magnitude(map: &AttributionMap) -> Vec<f64> {
    let t_len = map.len();
    let mut magnitudes = vec![0.0; JOINT_COUNT];
    for (j, magnitude) in magnitudes.iter_mut().enumerate() {
        let mut total = 0.0;
        for t in 0..t_len {
            for c in 0..COORDS {
                total += map.cell_score_distribute(t, j * COORDS + c).abs();
            }
        }
        *magnitude = total / t_len as f64;
    }
    magnitudes
}
