//! Cross-method evaluation on identical predictions and sequences.
//!
//! Every (method, smoothing) pair is scored on the same test sequences with
//! the same trained models; attributions are computed once per method and
//! re-smoothed per configuration. The analytic metrics (AUP, temporal
//! variance, accuracy) are pure functions of models, data, and seeds;
//! wall-clock latency is measurement and is serialized separately so the
//! analytic CSVs stay byte-reproducible.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use super::{aup, per_joint_magnitude, temporal_variance};
use crate::attribution::{
    grad_cam_map, gradient_saliency, shapley_full_fast, AttributionMap, Grouping, ShapMode,
};
use crate::data::FeatureSequence;
use crate::error::{Result, TshapError};
use crate::model::{Classifier, ModelKind, TrainedModel};
use crate::rng::SplitMix64;
use crate::smoothing::{smooth, SmoothingConfig};

/// Attribution methods the harness can run.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "name", rename_all = "snake_case")]
pub enum AttributionMethod {
    ShapExact,
    ShapSampled { n_permutations: usize },
    Saliency,
    GradCam,
}

impl AttributionMethod {
    pub fn tag(&self) -> String {
        match self {
            AttributionMethod::ShapExact => "shap[exact]".into(),
            AttributionMethod::ShapSampled { n_permutations } => {
                format!("shap[sampled;n={n_permutations}]")
            }
            AttributionMethod::Saliency => "saliency".into(),
            AttributionMethod::GradCam => "gradcam".into(),
        }
    }

    fn model_kind(&self) -> ModelKind {
        match self {
            AttributionMethod::GradCam => ModelKind::Cnn,
            _ => ModelKind::Lstm,
        }
    }
}

/// What to run: the method set, the smoothing configurations (None = raw),
/// the masking grid, and the player grouping.
#[derive(Debug, Clone)]
pub struct CompareSpec {
    pub methods: Vec<AttributionMethod>,
    pub smoothings: Vec<Option<SmoothingConfig>>,
    pub fractions: Vec<f64>,
    pub grouping: Grouping,
    pub seed: u64,
    /// Rank masking cells by |attribution| instead of signed values.
    pub abs_rank: bool,
}

/// One (method, smoothing, sequence) evaluation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsRow {
    pub fold: usize,
    pub seq_id: usize,
    pub method: String,
    pub smoothing: String,
    pub model_kind: ModelKind,
    pub aup: f64,
    pub tv: f64,
    /// Wall time of the raw attribution computation.
    pub attribution_ms: f64,
    /// Wall time of the smoothing step (0 for raw rows).
    pub smoothing_ms: f64,
    /// Fold-level accuracy of the model this row's method explains;
    /// identical across all rows sharing a model by construction.
    pub accuracy: f64,
}

impl MetricsRow {
    /// Total explain+smooth wall time.
    pub fn latency_ms(&self) -> f64 {
        self.attribution_ms + self.smoothing_ms
    }
}

/// Mean ± sd of each metric per (method, smoothing) cell.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AggregateCell {
    pub method: String,
    pub smoothing: String,
    pub n: usize,
    pub aup_mean: f64,
    pub aup_sd: f64,
    pub tv_mean: f64,
    pub tv_sd: f64,
    pub latency_mean_ms: f64,
    pub latency_sd_ms: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport {
    pub fold: usize,
    pub rows: Vec<MetricsRow>,
    /// Mean per-joint |attribution| over the fold's sequences, keyed by
    /// `method|smoothing`.
    pub per_joint: BTreeMap<String, Vec<f64>>,
    pub lstm_accuracy: f64,
    pub cnn_accuracy: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsSummary {
    pub cells: Vec<AggregateCell>,
}

impl MetricsReport {
    pub fn aggregates(&self) -> Vec<AggregateCell> {
        let mut groups: BTreeMap<(String, String), Vec<&MetricsRow>> = BTreeMap::new();
        for row in &self.rows {
            groups
                .entry((row.method.clone(), row.smoothing.clone()))
                .or_default()
                .push(row);
        }
        groups
            .into_iter()
            .map(|((method, smoothing), rows)| {
                let collect = |f: fn(&MetricsRow) -> f64| -> Vec<f64> {
                    rows.iter().map(|r| f(r)).collect()
                };
                let aups = collect(|r| r.aup);
                let tvs = collect(|r| r.tv);
                let lats = collect(MetricsRow::latency_ms);
                AggregateCell {
                    method,
                    smoothing,
                    n: rows.len(),
                    aup_mean: crate::linalg::mean(&aups),
                    aup_sd: crate::linalg::sample_std(&aups),
                    tv_mean: crate::linalg::mean(&tvs),
                    tv_sd: crate::linalg::sample_std(&tvs),
                    latency_mean_ms: crate::linalg::mean(&lats),
                    latency_sd_ms: crate::linalg::sample_std(&lats),
                }
            })
            .collect()
    }
}

fn raw_attribution(
    method: AttributionMethod,
    lstm: &TrainedModel,
    cnn: Option<&TrainedModel>,
    x: &FeatureSequence,
    grouping: &Grouping,
    seed: u64,
) -> Result<AttributionMap> {
    match method {
        AttributionMethod::ShapExact => {
            let (target, _) = lstm.predict(x)?;
            shapley_full_fast(lstm, x, grouping, ShapMode::Exact, target)
        }
        AttributionMethod::ShapSampled { n_permutations } => {
            let (target, _) = lstm.predict(x)?;
            shapley_full_fast(
                lstm,
                x,
                grouping,
                ShapMode::Sampled {
                    n_permutations,
                    seed,
                },
                target,
            )
        }
        AttributionMethod::Saliency => {
            let (target, _) = lstm.predict(x)?;
            gradient_saliency(lstm, x, target)
        }
        AttributionMethod::GradCam => {
            let cnn = cnn.ok_or_else(|| {
                TshapError::invalid("grad_cam requires a trained CNN baseline")
            })?;
            let (target, _) = cnn.predict(x)?;
            grad_cam_map(cnn, x, grouping, target)
        }
    }
}

/// Runs every (method, smoothing) pair on the fold's sequences.
///
/// The report has exactly `|methods| · |smoothings| · |sequences|` rows.
/// Attribution maps are computed once per (method, sequence) and shared by
/// all smoothing configurations, mirroring the post-hoc nature of the
/// smoothing step.
pub fn compare_methods(
    lstm: &TrainedModel,
    cnn: Option<&TrainedModel>,
    fold: usize,
    sequences: &[(usize, &FeatureSequence)],
    spec: &CompareSpec,
) -> Result<MetricsReport> {
    if sequences.is_empty() {
        return Err(TshapError::invalid("no sequences to evaluate"));
    }
    if spec.methods.is_empty() {
        return Err(TshapError::invalid("no methods selected"));
    }
    if spec.smoothings.is_empty() {
        return Err(TshapError::invalid(
            "need at least one smoothing entry (None = raw)",
        ));
    }
    for cfg in spec.smoothings.iter().flatten() {
        cfg.validate()?;
    }
    if spec.methods.contains(&AttributionMethod::GradCam) && cnn.is_none() {
        return Err(TshapError::invalid(
            "methods include grad_cam but no CNN baseline was provided",
        ));
    }

    let seqs: Vec<&FeatureSequence> = sequences.iter().map(|&(_, s)| s).collect();
    let lstm_accuracy = lstm.accuracy(&seqs)?;
    let cnn_accuracy = match cnn {
        Some(model) => Some(model.accuracy(&seqs)?),
        None => None,
    };

    let mut rows = Vec::new();
    let mut joint_sums: BTreeMap<String, Vec<f64>> = BTreeMap::new();

    for &method in &spec.methods {
        let accuracy = match method.model_kind() {
            ModelKind::Lstm => lstm_accuracy,
            ModelKind::Cnn => cnn_accuracy.expect("checked above"),
        };
        for &(seq_id, x) in sequences {
            let seq_seed = SplitMix64::derive(spec.seed, &[40, seq_id as u64]);
            let started = Instant::now();
            let raw = raw_attribution(method, lstm, cnn, x, &spec.grouping, seq_seed)?;
            let attribution_ms = started.elapsed().as_secs_f64() * 1e3;

            for smoothing in &spec.smoothings {
                let (map, smoothing_tag, smoothing_ms) = match smoothing {
                    None => (raw.clone(), "none".to_string(), 0.0),
                    Some(cfg) => {
                        let started = Instant::now();
                        let smoothed = smooth(&raw, cfg)?;
                        (
                            smoothed,
                            cfg.method_tag(),
                            started.elapsed().as_secs_f64() * 1e3,
                        )
                    }
                };
                let curve = match method.model_kind() {
                    ModelKind::Lstm => super::perturbation::perturbation_curve_ranked(
                        lstm,
                        x,
                        &map,
                        &spec.fractions,
                        spec.abs_rank,
                    )?,
                    ModelKind::Cnn => super::perturbation::perturbation_curve_ranked(
                        cnn.expect("checked above"),
                        x,
                        &map,
                        &spec.fractions,
                        spec.abs_rank,
                    )?,
                };
                let row_aup = aup(&curve)?;
                let row_tv = temporal_variance(&map)?;

                let key = format!("{}|{}", method.tag(), smoothing_tag);
                let joints = per_joint_magnitude(&map);
                joint_sums
                    .entry(key)
                    .and_modify(|acc| {
                        for (a, j) in acc.iter_mut().zip(&joints) {
                            *a += j;
                        }
                    })
                    .or_insert(joints);

                rows.push(MetricsRow {
                    fold,
                    seq_id,
                    method: method.tag(),
                    smoothing: smoothing_tag,
                    model_kind: method.model_kind(),
                    aup: row_aup,
                    tv: row_tv,
                    attribution_ms,
                    smoothing_ms,
                    accuracy,
                });
            }
        }
    }

    let n_seq = sequences.len() as f64;
    let per_joint = joint_sums
        .into_iter()
        .map(|(key, sums)| (key, sums.into_iter().map(|s| s / n_seq).collect()))
        .collect();

    Ok(MetricsReport {
        fold,
        rows,
        per_joint,
        lstm_accuracy,
        cnn_accuracy,
    })
}

/// Long-format CSV of the analytic metrics (`aup`, `tv`, `accuracy`).
/// Latency is measurement, not derivation, and is serialized separately.
pub fn metrics_to_csv(reports: &[MetricsReport]) -> String {
    let mut out = String::from("fold,seq_id,method,smoothing,metric,value\n");
    for report in reports {
        for row in &report.rows {
            for (metric, value) in [
                ("aup", row.aup),
                ("tv", row.tv),
                ("accuracy", row.accuracy),
            ] {
                writeln!(
                    out,
                    "{},{},{},{},{metric},{value}",
                    row.fold, row.seq_id, row.method, row.smoothing
                )
                .unwrap();
            }
        }
    }
    out
}

pub fn write_metrics_csv(path: &Path, reports: &[MetricsReport]) -> Result<()> {
    crate::io::write_atomic(path, metrics_to_csv(reports).as_bytes())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::{generate_dataset, kfold_split, preprocess, GeneratorConfig};
    use crate::model::{train, ModelConfig, ModelKind};

    fn tiny_setup() -> (TrainedModel, TrainedModel, Vec<FeatureSequence>) {
        let gen_cfg = GeneratorConfig {
            seed: 5,
            n_per_class: 4,
            noise_std: 0.02,
            raw_length_range: (20, 30),
        };
        let data: Vec<FeatureSequence> = generate_dataset(&gen_cfg)
            .unwrap()
            .iter()
            .map(|s| preprocess(s, 12).unwrap())
            .collect();
        let cfg = ModelConfig {
            kind: ModelKind::Lstm,
            hidden_dim: 6,
            sequence_length: 12,
            epochs: 2,
            seed: 3,
            ..ModelConfig::default()
        };
        let lstm = train(&data, &cfg).unwrap();
        let cnn = train(
            &data,
            &ModelConfig {
                kind: ModelKind::Cnn,
                ..cfg
            },
        )
        .unwrap();
        (lstm, cnn, data)
    }

    #[test]
    fn report_cardinality_and_constant_accuracy() {
        let (lstm, cnn, data) = tiny_setup();
        let folds = kfold_split(&data, 2, 1).unwrap();
        let test_idx = folds.test_indices(&data, 0);
        let sequences: Vec<(usize, &FeatureSequence)> =
            test_idx.iter().map(|&i| (i, &data[i])).collect();

        let spec = CompareSpec {
            methods: vec![
                AttributionMethod::ShapSampled { n_permutations: 2 },
                AttributionMethod::Saliency,
                AttributionMethod::GradCam,
            ],
            smoothings: vec![None, Some(SmoothingConfig::uniform(2))],
            fractions: vec![0.1, 0.3],
            grouping: Grouping::body_parts(),
            seed: 11,
            abs_rank: false,
        };
        let report = compare_methods(&lstm, Some(&cnn), 0, &sequences, &spec).unwrap();
        assert_eq!(report.rows.len(), 3 * 2 * sequences.len());

        // Post-hoc methods never alter predictions: all rows of one model
        // carry the same fold accuracy.
        for row in &report.rows {
            let expected = match row.model_kind {
                ModelKind::Lstm => report.lstm_accuracy,
                ModelKind::Cnn => report.cnn_accuracy.unwrap(),
            };
            assert_eq!(row.accuracy, expected);
        }

        // AUP bounded by construction.
        for row in &report.rows {
            assert!((0.0..=1.0).contains(&row.aup), "aup {}", row.aup);
        }

        // Per-joint vectors have 25 entries.
        for joints in report.per_joint.values() {
            assert_eq!(joints.len(), 25);
        }

        let aggregates = report.aggregates();
        assert_eq!(aggregates.len(), 3 * 2);
    }

    #[test]
    fn analytic_metrics_are_deterministic() {
        let (lstm, cnn, data) = tiny_setup();
        let sequences: Vec<(usize, &FeatureSequence)> =
            data.iter().take(3).enumerate().collect();
        let spec = CompareSpec {
            methods: vec![AttributionMethod::ShapSampled { n_permutations: 3 }],
            smoothings: vec![None, Some(SmoothingConfig::ewma(0.4))],
            fractions: vec![0.2, 0.4],
            grouping: Grouping::body_parts(),
            seed: 9,
            abs_rank: false,
        };
        let a = compare_methods(&lstm, Some(&cnn), 1, &sequences, &spec).unwrap();
        let b = compare_methods(&lstm, Some(&cnn), 1, &sequences, &spec).unwrap();
        assert_eq!(metrics_to_csv(&[a]), metrics_to_csv(&[b]));
    }

    #[test]
    fn gradcam_without_cnn_is_rejected() {
        let (lstm, _, data) = tiny_setup();
        let sequences: Vec<(usize, &FeatureSequence)> =
            data.iter().take(1).enumerate().collect();
        let spec = CompareSpec {
            methods: vec![AttributionMethod::GradCam],
            smoothings: vec![None],
            fractions: vec![0.2],
            grouping: Grouping::body_parts(),
            seed: 0,
            abs_rank: false,
        };
        assert!(compare_methods(&lstm, None, 0, &sequences, &spec).is_err());
    }
}
