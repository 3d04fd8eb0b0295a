//! Temporal stabilization of attribution maps.
//!
//! Two linear, prediction-preserving smoothers applied per player column:
//!
//! * symmetric window averaging over `{t−w, …, t+w}`, where the window is
//!   truncated to valid frames near the boundaries and the divisor counts
//!   only those frames;
//! * a causal exponentially weighted moving average
//!   `Ã_t = α·A_t + (1−α)·Ã_{t−1}` with `Ã_1 = A_1`.
//!
//! The window average also has an explicit banded-operator form so the whole
//! transform can be inspected as a T×T row-stochastic matrix.

use serde::{Deserialize, Serialize};

use crate::attribution::AttributionMap;
use crate::error::{Result, TshapError};
use crate::linalg::Mat;

/// Boundary handling of the operator form.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum BoundaryMode {
    /// Rows average only the valid frames (each row sums to 1). This is the
    /// window-average definition and the default.
    #[default]
    TruncateRenormalize,
    /// Columns are additionally rescaled to sum to 1, conserving total mass;
    /// boundary rows then no longer sum to 1.
    MassPreserving,
}

/// Smoothing settings; the uniform kind carries the half-window `w`, the
/// EWMA kind its coefficient `alpha`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SmoothingConfig {
    Uniform {
        w: usize,
        #[serde(default)]
        boundary: BoundaryMode,
    },
    Ewma {
        alpha: f64,
    },
}

impl SmoothingConfig {
    pub fn uniform(w: usize) -> Self {
        SmoothingConfig::Uniform {
            w,
            boundary: BoundaryMode::TruncateRenormalize,
        }
    }

    pub fn ewma(alpha: f64) -> Self {
        SmoothingConfig::Ewma { alpha }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            SmoothingConfig::Uniform { .. } => Ok(()),
            SmoothingConfig::Ewma { alpha } => {
                if *alpha > 0.0 && *alpha <= 1.0 {
                    Ok(())
                } else {
                    Err(TshapError::invalid(format!(
                        "alpha must be in (0, 1], got {alpha}"
                    )))
                }
            }
        }
    }

    /// Method tag recorded on smoothed maps, e.g. `tshap[w=2]`.
    pub fn method_tag(&self) -> String {
        match self {
            SmoothingConfig::Uniform {
                w,
                boundary: BoundaryMode::TruncateRenormalize,
            } => format!("tshap[w={w}]"),
            SmoothingConfig::Uniform {
                w,
                boundary: BoundaryMode::MassPreserving,
            } => format!("tshap[w={w};mass]"),
            SmoothingConfig::Ewma { alpha } => format!("tshap[alpha={alpha}]"),
        }
    }
}

/// The T×T banded matrix realizing the window average.
#[derive(Debug, Clone, PartialEq)]
pub struct SmoothingOperator {
    pub matrix: Mat,
    pub half_window: usize,
    pub boundary: BoundaryMode,
}

impl SmoothingOperator {
    /// Checks bandedness, non-negativity, and (in truncate-renormalize mode)
    /// that every row sums to 1 within 1e-12.
    pub fn validate(&self) -> Result<()> {
        let t_len = self.matrix.rows();
        if self.matrix.cols() != t_len {
            return Err(TshapError::invalid("operator must be square"));
        }
        for r in 0..t_len {
            let mut row_sum = 0.0;
            for c in 0..t_len {
                let v = self.matrix.get(r, c);
                if v < 0.0 {
                    return Err(TshapError::invalid("operator entries must be >= 0"));
                }
                let in_band = c + self.half_window >= r && c <= r + self.half_window;
                if !in_band && v != 0.0 {
                    return Err(TshapError::invalid(format!(
                        "entry ({r}, {c}) outside bandwidth {}",
                        2 * self.half_window + 1
                    )));
                }
                row_sum += v;
            }
            if self.boundary == BoundaryMode::TruncateRenormalize
                && (row_sum - 1.0).abs() > 1e-12
            {
                return Err(TshapError::invalid(format!(
                    "row {r} sums to {row_sum}, expected 1"
                )));
            }
        }
        Ok(())
    }

    /// Applies the operator along the temporal axis of a T×G matrix.
    pub fn apply(&self, values: &Mat) -> Mat {
        let t_len = values.rows();
        assert_eq!(self.matrix.rows(), t_len, "operator size mismatch");
        let mut out = Mat::zeros(t_len, values.cols());
        for t in 0..t_len {
            let lo = t.saturating_sub(self.half_window);
            let hi = (t + self.half_window).min(t_len - 1);
            for s in lo..=hi {
                let weight = self.matrix.get(t, s);
                if weight == 0.0 {
                    continue;
                }
                let src = values.row(s);
                let dst = out.row_mut(t);
                for (d, v) in dst.iter_mut().zip(src) {
                    *d += weight * v;
                }
            }
        }
        out
    }
}

/// Builds the banded operator for sequence length `t_len` and half-window `w`.
pub fn build_operator(t_len: usize, w: usize, boundary: BoundaryMode) -> Result<SmoothingOperator> {
    if t_len < 1 {
        return Err(TshapError::invalid("sequence length must be >= 1"));
    }
    let mut matrix = Mat::zeros(t_len, t_len);
    for t in 0..t_len {
        let lo = t.saturating_sub(w);
        let hi = (t + w).min(t_len - 1);
        let weight = 1.0 / (hi - lo + 1) as f64;
        for s in lo..=hi {
            matrix.set(t, s, weight);
        }
    }
    if boundary == BoundaryMode::MassPreserving {
        for c in 0..t_len {
            let col_sum: f64 = (0..t_len).map(|r| matrix.get(r, c)).sum();
            if col_sum > 0.0 {
                for r in 0..t_len {
                    matrix.set(r, c, matrix.get(r, c) / col_sum);
                }
            }
        }
    }
    let op = SmoothingOperator {
        matrix,
        half_window: w,
        boundary,
    };
    if boundary == BoundaryMode::TruncateRenormalize {
        op.validate()?;
    }
    Ok(op)
}

fn uniform_smooth_values(values: &Mat, w: usize) -> Mat {
    let t_len = values.rows();
    let mut out = Mat::zeros(t_len, values.cols());
    for t in 0..t_len {
        let lo = t.saturating_sub(w);
        let hi = (t + w).min(t_len - 1);
        let scale = 1.0 / (hi - lo + 1) as f64;
        for s in lo..=hi {
            let src = values.row(s);
            let dst = out.row_mut(t);
            for (d, v) in dst.iter_mut().zip(src) {
                *d += v;
            }
        }
        for d in out.row_mut(t) {
            *d *= scale;
        }
    }
    out
}

/// Symmetric window average with truncate-renormalize boundaries; shape,
/// granularity, and target class are preserved.
pub fn uniform_smooth(map: &AttributionMap, w: usize) -> AttributionMap {
    map.with_values(
        uniform_smooth_values(&map.values, w),
        SmoothingConfig::uniform(w).method_tag(),
    )
}

fn ewma_smooth_values(values: &Mat, alpha: f64) -> Mat {
    let mut out = values.clone();
    for t in 1..values.rows() {
        for g in 0..values.cols() {
            let prev = out.get(t - 1, g);
            let cur = values.get(t, g);
            out.set(t, g, alpha * cur + (1.0 - alpha) * prev);
        }
    }
    out
}

/// Causal exponential smoothing per column: `Ã_1 = A_1`,
/// `Ã_t = α·A_t + (1−α)·Ã_{t−1}`.
pub fn ewma_smooth(map: &AttributionMap, alpha: f64) -> Result<AttributionMap> {
    SmoothingConfig::ewma(alpha).validate()?;
    Ok(map.with_values(
        ewma_smooth_values(&map.values, alpha),
        SmoothingConfig::ewma(alpha).method_tag(),
    ))
}

/// Dispatches to the configured smoother and records the config in the
/// output's method tag.
pub fn smooth(map: &AttributionMap, cfg: &SmoothingConfig) -> Result<AttributionMap> {
    cfg.validate()?;
    match *cfg {
        SmoothingConfig::Uniform {
            w,
            boundary: BoundaryMode::TruncateRenormalize,
        } => Ok(uniform_smooth(map, w)),
        SmoothingConfig::Uniform {
            w,
            boundary: BoundaryMode::MassPreserving,
        } => {
            let op = build_operator(map.len(), w, BoundaryMode::MassPreserving)?;
            Ok(map.with_values(op.apply(&map.values), cfg.method_tag()))
        }
        SmoothingConfig::Ewma { alpha } => ewma_smooth(map, alpha),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::attribution::Granularity;
    use crate::rng::SplitMix64;

    fn map_from_columns(columns: &[Vec<f64>]) -> AttributionMap {
        let t_len = columns[0].len();
        let mut values = Mat::zeros(t_len, 75);
        for (g, col) in columns.iter().enumerate() {
            for (t, &v) in col.iter().enumerate() {
                values.set(t, g, v);
            }
        }
        AttributionMap::new(values, Granularity::PerFeature, None, 0, "raw").unwrap()
    }

    fn column(map: &AttributionMap, g: usize) -> Vec<f64> {
        (0..map.len()).map(|t| map.values.get(t, g)).collect()
    }

    #[test]
    fn zero_window_is_identity() {
        let map = map_from_columns(&[vec![1.0, -2.0, 3.0]]);
        let out = uniform_smooth(&map, 0);
        assert_eq!(out.values, map.values);
        assert_eq!(out.method, "tshap[w=0]");
    }

    #[test]
    fn spike_column_hand_case() {
        // [0, 1, 0] with w = 1 → [1/2, 1/3, 1/2].
        let map = map_from_columns(&[vec![0.0, 1.0, 0.0]]);
        let out = uniform_smooth(&map, 1);
        let got = column(&out, 0);
        assert!((got[0] - 0.5).abs() < 1e-15);
        assert!((got[1] - 1.0 / 3.0).abs() < 1e-15);
        assert!((got[2] - 0.5).abs() < 1e-15);
    }

    #[test]
    fn constant_map_is_fixed_point() {
        let map = map_from_columns(&[vec![0.7; 9]]);
        let smoothed = uniform_smooth(&map, 3);
        for v in column(&smoothed, 0) {
            assert!((v - 0.7).abs() < 1e-12);
        }
        let ewma = ewma_smooth(&map, 0.25).unwrap();
        for v in column(&ewma, 0) {
            assert!((v - 0.7).abs() < 1e-12);
        }
    }

    #[test]
    fn operator_rows_for_t3_w1() {
        let op = build_operator(3, 1, BoundaryMode::TruncateRenormalize).unwrap();
        assert_eq!(op.matrix.row(0), &[0.5, 0.5, 0.0]);
        assert_eq!(op.matrix.row(1), &[1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0]);
        assert_eq!(op.matrix.row(2), &[0.0, 0.5, 0.5]);
        op.validate().unwrap();
    }

    #[test]
    fn operator_equals_direct_smoothing_on_random_maps() {
        let mut rng = SplitMix64::new(88);
        for &(t_len, w) in &[(7usize, 1usize), (12, 2), (9, 4), (5, 6)] {
            let mut values = Mat::zeros(t_len, 75);
            for t in 0..t_len {
                for g in 0..75 {
                    values.set(t, g, rng.normal(0.0, 1.0));
                }
            }
            let map =
                AttributionMap::new(values, Granularity::PerFeature, None, 0, "raw").unwrap();
            let direct = uniform_smooth(&map, w);
            let op = build_operator(t_len, w, BoundaryMode::TruncateRenormalize).unwrap();
            let via_operator = op.apply(&map.values);
            for (a, b) in direct.values.data().iter().zip(via_operator.data()) {
                assert!((a - b).abs() <= 1e-12);
            }
        }
    }

    #[test]
    fn full_window_middle_row_is_global_mean() {
        let op = build_operator(5, 4, BoundaryMode::TruncateRenormalize).unwrap();
        for c in 0..5 {
            assert!((op.matrix.get(2, c) - 0.2).abs() < 1e-15);
        }
    }

    #[test]
    fn mass_preserving_columns_sum_to_one() {
        let op = build_operator(6, 2, BoundaryMode::MassPreserving).unwrap();
        for c in 0..6 {
            let sum: f64 = (0..6).map(|r| op.matrix.get(r, c)).sum();
            assert!((sum - 1.0).abs() <= 1e-12);
        }
    }

    #[test]
    fn ewma_hand_case_and_identity() {
        let map = map_from_columns(&[vec![1.0, 0.0, 0.0]]);
        let out = ewma_smooth(&map, 0.5).unwrap();
        assert_eq!(column(&out, 0), vec![1.0, 0.5, 0.25]);

        let identity = ewma_smooth(&map, 1.0).unwrap();
        assert_eq!(identity.values, map.values);
        assert!(ewma_smooth(&map, 0.0).is_err());
        assert!(ewma_smooth(&map, 1.5).is_err());
    }

    #[test]
    fn smooth_dispatch_records_tags() {
        let map = map_from_columns(&[vec![0.0, 1.0, 0.0]]);
        let uniform = smooth(&map, &SmoothingConfig::uniform(2)).unwrap();
        assert_eq!(uniform.method, "tshap[w=2]");
        let ewma = smooth(&map, &SmoothingConfig::ewma(1.0)).unwrap();
        assert_eq!(ewma.method, "tshap[alpha=1]");
        assert_eq!(ewma.values, map.values);
    }

    #[test]
    fn smoothing_is_linear() {
        let mut rng = SplitMix64::new(4);
        let a = map_from_columns(&[(0..8).map(|_| rng.normal(0.0, 1.0)).collect()]);
        let b = map_from_columns(&[(0..8).map(|_| rng.normal(0.0, 1.0)).collect()]);
        let (ca, cb) = (1.7, -0.4);
        let mut combo_values = a.values.clone();
        combo_values.scale(ca);
        combo_values.add_scaled(&b.values, cb);
        let combo = a.with_values(combo_values, "raw");

        for cfg in [SmoothingConfig::uniform(2), SmoothingConfig::ewma(0.3)] {
            let lhs = smooth(&combo, &cfg).unwrap();
            let sa = smooth(&a, &cfg).unwrap();
            let sb = smooth(&b, &cfg).unwrap();
            for t in 0..8 {
                let rhs = ca * sa.values.get(t, 0) + cb * sb.values.get(t, 0);
                assert!((lhs.values.get(t, 0) - rhs).abs() <= 1e-12);
            }
        }
    }

    #[test]
    fn uniform_smoothing_stays_within_column_bounds() {
        let mut rng = SplitMix64::new(5);
        let col: Vec<f64> = (0..20).map(|_| rng.uniform(-3.0, 3.0)).collect();
        let lo = col.iter().cloned().fold(f64::INFINITY, f64::min);
        let hi = col.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let map = map_from_columns(&[col]);
        let out = uniform_smooth(&map, 3);
        for v in column(&out, 0) {
            assert!(v >= lo - 1e-12 && v <= hi + 1e-12);
        }
    }

    #[test]
    fn interior_mass_preserved_for_boundary_padded_maps() {
        // A map that is zero near both ends loses nothing to truncation.
        let w = 2;
        let mut col = vec![0.0; 16];
        for (t, value) in col.iter_mut().enumerate().take(12).skip(4) {
            *value = ((t * 13 % 7) as f64) - 3.0;
        }
        let total: f64 = col.iter().sum();
        let map = map_from_columns(&[col]);
        let smoothed = uniform_smooth(&map, w);
        let smoothed_total: f64 = column(&smoothed, 0).iter().sum();
        assert!((smoothed_total - total).abs() <= 1e-12);
    }

    #[test]
    fn noise_attenuation_matches_window_size() {
        // i.i.d. noise variance shrinks by ~1/(2w+1) on interior frames.
        let w = 2;
        let t_len = 200;
        let trials = 100;
        let mut ratios = Vec::new();
        for trial in 0..trials {
            let mut rng = SplitMix64::from_path(1000, &[trial]);
            let col: Vec<f64> = (0..t_len).map(|_| rng.normal(0.0, 1.0)).collect();
            let map = map_from_columns(&[col.clone()]);
            let smoothed = uniform_smooth(&map, w);
            let interior = w..t_len - w;
            let var = |xs: &[f64]| {
                let m = xs.iter().sum::<f64>() / xs.len() as f64;
                xs.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / (xs.len() - 1) as f64
            };
            let raw_var = var(&col[interior.clone()]);
            let smooth_col = column(&smoothed, 0);
            let smooth_var = var(&smooth_col[interior]);
            ratios.push(smooth_var / raw_var);
        }
        let mean_ratio = ratios.iter().sum::<f64>() / trials as f64;
        let bound = 1.25 / (2 * w + 1) as f64;
        assert!(
            mean_ratio <= bound,
            "attenuation {mean_ratio} exceeds bound {bound}"
        );
    }
}
