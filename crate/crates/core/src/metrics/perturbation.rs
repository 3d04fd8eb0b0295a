//! Perturbation-based faithfulness: rank cells by attribution, cumulatively
//! zero-mask the top fraction, and record the normalized confidence drop.

use serde::{Deserialize, Serialize};

use crate::attribution::AttributionMap;
use crate::data::FeatureSequence;
use crate::error::{Result, TshapError};
use crate::model::Classifier;

/// Masking-fraction grid paired with normalized confidence drops.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PerturbationCurve {
    pub fractions: Vec<f64>,
    pub confidence_drop: Vec<f64>,
    pub base_confidence: f64,
    pub target_class: usize,
}

impl PerturbationCurve {
    pub fn validate(&self) -> Result<()> {
        if self.fractions.len() != self.confidence_drop.len() {
            return Err(TshapError::invalid("fractions/drops length mismatch"));
        }
        for pair in self.fractions.windows(2) {
            if pair[1] <= pair[0] {
                return Err(TshapError::invalid("fractions must be strictly ascending"));
            }
        }
        if self
            .fractions
            .iter()
            .any(|f| !f.is_finite() || *f < 0.0 || *f > 1.0)
        {
            return Err(TshapError::invalid("fractions must lie in [0, 1]"));
        }
        if self
            .confidence_drop
            .iter()
            .any(|d| !d.is_finite() || *d < 0.0 || *d > 1.0)
        {
            return Err(TshapError::invalid("drops must lie in [0, 1]"));
        }
        Ok(())
    }
}

/// The default masking grid {5%, 10%, …, 50%}.
pub fn default_fraction_grid() -> Vec<f64> {
    (1..=10).map(|k| k as f64 * 0.05).collect()
}

/// Ranks all (frame, feature) cells by attribution (descending, ties by
/// frame then feature ascending), then for each fraction f zero-masks the
/// top ⌈f·T·d⌉ cells cumulatively and records
/// `drop = max(0, (p₀ − p_f)/p₀)` for the target class.
///
/// Grouped maps expand first: every member feature inherits its group score,
/// so all methods rank on the same T×75 cell grid. Ranking uses signed
/// scores (positive attribution supports the prediction); see
/// [`perturbation_curve_abs`] for magnitude ranking.
pub fn perturbation_curve<M: Classifier + ?Sized>(
    model: &M,
    x: &FeatureSequence,
    map: &AttributionMap,
    fractions: &[f64],
) -> Result<PerturbationCurve> {
    perturbation_curve_ranked(model, x, map, fractions, false)
}

/// [`perturbation_curve`] ranking by |attribution| instead of signed values.
pub fn perturbation_curve_abs<M: Classifier + ?Sized>(
    model: &M,
    x: &FeatureSequence,
    map: &AttributionMap,
    fractions: &[f64],
) -> Result<PerturbationCurve> {
    perturbation_curve_ranked(model, x, map, fractions, true)
}

pub(crate) fn perturbation_curve_ranked<M: Classifier + ?Sized>(
    model: &M,
    x: &FeatureSequence,
    map: &AttributionMap,
    fractions: &[f64],
    abs_rank: bool,
) -> Result<PerturbationCurve> {
    if fractions.is_empty() {
        return Err(TshapError::invalid("fraction grid must be non-empty"));
    }
    if map.len() != x.len() {
        return Err(TshapError::invalid(format!(
            "attribution has {} frames, sequence has {}",
            map.len(),
            x.len()
        )));
    }
    let t_len = x.len();
    let d = x.data.cols();

    let base_probs = model.predict_proba_mat(&x.data)?;
    let base_confidence = base_probs[map.target_class];
    if base_confidence == 0.0 {
        return Err(TshapError::DegenerateBaseline);
    }

    // Rank the full cell grid once.
    let mut cells: Vec<(usize, usize, f64)> = Vec::with_capacity(t_len * d);
    for t in 0..t_len {
        for feature in 0..d {
            let score = map.cell_score_inherit(t, feature);
            cells.push((t, feature, if abs_rank { score.abs() } else { score }));
        }
    }
    cells.sort_by(|a, b| {
        b.2.partial_cmp(&a.2)
            .expect("attribution values are finite")
            .then(a.0.cmp(&b.0))
            .then(a.1.cmp(&b.1))
    });

    let mut masked = x.data.clone();
    let mut masked_so_far = 0usize;
    let mut drops = Vec::with_capacity(fractions.len());
    let total_cells = t_len * d;

    for pair in fractions.windows(2) {
        if pair[1] <= pair[0] {
            return Err(TshapError::invalid("fractions must be strictly ascending"));
        }
    }
    for &fraction in fractions {
        if !(0.0..=1.0).contains(&fraction) {
            return Err(TshapError::invalid(format!(
                "fraction {fraction} outside [0, 1]"
            )));
        }
        let want = (fraction * total_cells as f64).ceil() as usize;
        let want = want.min(total_cells);
        while masked_so_far < want {
            let (t, feature, _) = cells[masked_so_far];
            masked.set(t, feature, 0.0);
            masked_so_far += 1;
        }
        let probs = model.predict_proba_mat(&masked)?;
        let drop = (base_confidence - probs[map.target_class]) / base_confidence;
        drops.push(drop.max(0.0));
    }

    let curve = PerturbationCurve {
        fractions: fractions.to_vec(),
        confidence_drop: drops,
        base_confidence,
        target_class: map.target_class,
    };
    curve.validate()?;
    Ok(curve)
}

/// Area under the perturbation curve: the mean normalized confidence drop
/// over the fraction grid. Higher values mean the top-attributed cells were
/// genuinely load-bearing for the prediction.
pub fn aup(curve: &PerturbationCurve) -> Result<f64> {
    if curve.confidence_drop.is_empty() {
        return Err(TshapError::invalid("empty perturbation grid"));
    }
    Ok(curve.confidence_drop.iter().sum::<f64>() / curve.confidence_drop.len() as f64)
}
