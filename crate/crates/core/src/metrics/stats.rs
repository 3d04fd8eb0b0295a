//! Fold-level statistical comparison.

use crate::error::{Result, TshapError};
use crate::linalg::{mean, sample_std};

/// Paired t-test on per-fold values: with differences d = a − b,
/// `t = mean(d) / (sd(d)/√k)` and `df = k − 1` (sd uses the k−1 denominator).
///
/// All-equal differences have zero sample variance and are reported as a
/// degenerate-variance error rather than an infinite statistic.
pub fn paired_ttest(a: &[f64], b: &[f64]) -> Result<(f64, usize)> {
    if a.len() != b.len() {
        return Err(TshapError::invalid("paired samples must have equal length"));
    }
    if a.len() < 2 {
        return Err(TshapError::invalid("need at least two pairs"));
    }
    let diffs: Vec<f64> = a.iter().zip(b).map(|(x, y)| x - y).collect();
    let sd = sample_std(&diffs);
    if sd == 0.0 {
        return Err(TshapError::DegenerateVariance);
    }
    let k = diffs.len() as f64;
    let t = mean(&diffs) / (sd / k.sqrt());
    Ok((t, diffs.len() - 1))
}
