//! `tshap evaluate` — the full cross-method report: long-format metrics,
//! per-cell summary, heatmap grids, per-joint profiles, and the
//! faithfulness–latency pairs.
//!
//! Analytic outputs (metrics.csv, heatmaps, per-joint, summary) are pure
//! functions of config and seeds. Wall-clock measurements go only into
//! latency.csv and faithfulness_latency.csv.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde::Serialize;

use crate::config::ExperimentConfig;
use crate::manifest::RunManifest;
use tshap_core::data::FeatureSequence;
use tshap_core::linalg::{mean, sample_std};
use tshap_core::metrics::{
    compare_methods, metrics_to_csv, AggregateCell, CompareSpec, MetricsReport, MetricsSummary,
};
use tshap_core::{Result, TshapError};

/// metrics_summary.json cell: the deterministic statistics only (latency
/// means live in faithfulness_latency.csv).
#[derive(Serialize)]
struct AnalyticCell {
    method: String,
    smoothing: String,
    n: usize,
    aup_mean: f64,
    aup_sd: f64,
    tv_mean: f64,
    tv_sd: f64,
}

#[derive(Serialize)]
struct AnalyticSummary {
    cells: Vec<AnalyticCell>,
}

impl From<&MetricsSummary> for AnalyticSummary {
    fn from(summary: &MetricsSummary) -> Self {
        Self {
            cells: summary
                .cells
                .iter()
                .map(|c| AnalyticCell {
                    method: c.method.clone(),
                    smoothing: c.smoothing.clone(),
                    n: c.n,
                    aup_mean: c.aup_mean,
                    aup_sd: c.aup_sd,
                    tv_mean: c.tv_mean,
                    tv_sd: c.tv_sd,
                })
                .collect(),
        }
    }
}

pub fn build_spec(cfg: &ExperimentConfig) -> CompareSpec {
    let mut smoothings = vec![None];
    smoothings.extend(cfg.smoothing.iter().copied().map(Some));
    CompareSpec {
        methods: cfg.method_list(),
        smoothings,
        fractions: cfg.evaluation.fractions.clone(),
        grouping: cfg.grouping(),
        seed: cfg.seed,
        abs_rank: cfg.evaluation.abs_rank,
    }
}

/// Mean ± sd across folds of the per-fold metric means, per
/// (method, smoothing) cell.
pub fn fold_level_summary(reports: &[MetricsReport]) -> MetricsSummary {
    let mut cells: BTreeMap<(String, String), Vec<AggregateCell>> = BTreeMap::new();
    for report in reports {
        for cell in report.aggregates() {
            cells
                .entry((cell.method.clone(), cell.smoothing.clone()))
                .or_default()
                .push(cell);
        }
    }
    let cells = cells
        .into_iter()
        .map(|((method, smoothing), per_fold)| {
            let collect = |f: fn(&AggregateCell) -> f64| -> Vec<f64> {
                per_fold.iter().map(f).collect()
            };
            let aups = collect(|c| c.aup_mean);
            let tvs = collect(|c| c.tv_mean);
            let lats = collect(|c| c.latency_mean_ms);
            AggregateCell {
                method,
                smoothing,
                n: per_fold.len(),
                aup_mean: mean(&aups),
                aup_sd: sample_std(&aups),
                tv_mean: mean(&tvs),
                tv_sd: sample_std(&tvs),
                latency_mean_ms: mean(&lats),
                latency_sd_ms: sample_std(&lats),
            }
        })
        .collect();
    MetricsSummary { cells }
}

/// Runs the comparison over every fold; shared with sweep/ablate.
pub fn run_all_folds(
    cfg: &ExperimentConfig,
    spec: &CompareSpec,
) -> Result<(Vec<MetricsReport>, Vec<FeatureSequence>)> {
    let data = super::load_dataset(cfg)?;
    let folds = super::folds_of(cfg, &data)?;
    let mut reports = Vec::with_capacity(cfg.k);
    for fold in 0..cfg.k {
        let model = super::load_fold_model(cfg, fold)?;
        let cnn = super::load_fold_cnn(cfg, fold)?;
        let ids = super::eval_ids(cfg, &folds, &data, fold);
        if ids.is_empty() {
            return Err(TshapError::invalid(format!(
                "fold {fold} has no test sequences"
            )));
        }
        let sequences: Vec<(usize, &FeatureSequence)> =
            ids.iter().map(|&i| (i, &data[i])).collect();
        reports.push(compare_methods(&model, cnn.as_ref(), fold, &sequences, spec)?);
    }
    Ok((reports, data))
}

fn heatmap_csv(map: &tshap_core::attribution::AttributionMap) -> String {
    let mut out = String::new();
    for g in 0..map.width() {
        if g > 0 {
            out.push(',');
        }
        write!(out, "g{g}").unwrap();
    }
    out.push('\n');
    for t in 0..map.len() {
        for g in 0..map.width() {
            if g > 0 {
                out.push(',');
            }
            write!(out, "{}", map.values.get(t, g)).unwrap();
        }
        out.push('\n');
    }
    out
}

/// Writes the heatmap grids: raw and smoothed maps of every method for
/// one representative sequence (the first evaluated sequence of fold 0).
fn write_heatmaps(cfg: &ExperimentConfig, spec: &CompareSpec) -> Result<()> {
    let data = super::load_dataset(cfg)?;
    let folds = super::folds_of(cfg, &data)?;
    let model = super::load_fold_model(cfg, 0)?;
    let cnn = super::load_fold_cnn(cfg, 0)?;
    let ids = super::eval_ids(cfg, &folds, &data, 0);
    let sequences: Vec<(usize, &FeatureSequence)> =
        ids.iter().take(1).map(|&i| (i, &data[i])).collect();

    let out = super::out_dir(cfg);
    for &method in &spec.methods {
        for smoothing in &spec.smoothings {
            let single = CompareSpec {
                methods: vec![method],
                smoothings: vec![*smoothing],
                fractions: spec.fractions.clone(),
                grouping: spec.grouping.clone(),
                seed: spec.seed,
                abs_rank: spec.abs_rank,
            };
            // Recompute the map exactly as the report did.
            let map = crate::commands::evaluate::single_map(
                &model,
                cnn.as_ref(),
                &single,
                sequences[0],
            )?;
            let tag = match smoothing {
                None => map.0,
                Some(cfg_s) => format!("{}__{}", map.0, cfg_s.method_tag()),
            };
            super::write_csv(
                &out.join(format!("heatmap_{}.csv", super::sanitize_tag(&tag))),
                &heatmap_csv(&map.1),
            )?;
        }
    }
    Ok(())
}

/// One (method, smoothing) attribution map for one sequence; returns the
/// method tag and the map.
pub fn single_map(
    model: &tshap_core::model::TrainedModel,
    cnn: Option<&tshap_core::model::TrainedModel>,
    spec: &CompareSpec,
    (seq_id, x): (usize, &FeatureSequence),
) -> Result<(String, tshap_core::attribution::AttributionMap)> {
    use tshap_core::attribution::{grad_cam_map, gradient_saliency, shapley_full_fast, ShapMode};
    use tshap_core::metrics::AttributionMethod;
    use tshap_core::model::Classifier;
    use tshap_core::rng::SplitMix64;

    let method = spec.methods[0];
    let raw = match method {
        AttributionMethod::ShapExact => {
            let (target, _) = model.predict(x)?;
            shapley_full_fast(model, x, &spec.grouping, ShapMode::Exact, target)?
        }
        AttributionMethod::ShapSampled { n_permutations } => {
            let (target, _) = model.predict(x)?;
            shapley_full_fast(
                model,
                x,
                &spec.grouping,
                ShapMode::Sampled {
                    n_permutations,
                    seed: SplitMix64::derive(spec.seed, &[40, seq_id as u64]),
                },
                target,
            )?
        }
        AttributionMethod::Saliency => {
            let (target, _) = model.predict(x)?;
            gradient_saliency(model, x, target)?
        }
        AttributionMethod::GradCam => {
            let cnn = cnn.ok_or_else(|| TshapError::invalid("grad_cam needs the CNN"))?;
            let (target, _) = cnn.predict(x)?;
            grad_cam_map(cnn, x, &spec.grouping, target)?
        }
    };
    match &spec.smoothings[0] {
        None => Ok((method.tag(), raw)),
        Some(cfg_s) => {
            let smoothed = tshap_core::smoothing::smooth(&raw, cfg_s)?;
            Ok((method.tag(), smoothed))
        }
    }
}

pub fn run(cfg: &ExperimentConfig) -> Result<()> {
    let out = super::out_dir(cfg);
    std::fs::create_dir_all(&out)?;
    let spec = build_spec(cfg);
    let (reports, _) = run_all_folds(cfg, &spec)?;

    // Analytic outputs.
    super::write_csv(&out.join("metrics.csv"), &metrics_to_csv(&reports))?;
    let summary = fold_level_summary(&reports);
    tshap_core::io::write_json(
        &out.join("metrics_summary.json"),
        &AnalyticSummary::from(&summary),
    )?;

    let mut per_joint_csv = String::from("method,smoothing,joint,magnitude\n");
    let mut joint_totals: BTreeMap<String, Vec<f64>> = BTreeMap::new();
    for report in &reports {
        for (key, joints) in &report.per_joint {
            joint_totals
                .entry(key.clone())
                .and_modify(|acc| {
                    for (a, j) in acc.iter_mut().zip(joints) {
                        *a += j;
                    }
                })
                .or_insert_with(|| joints.clone());
        }
    }
    for (key, totals) in &joint_totals {
        let (method, smoothing) = key.split_once('|').unwrap_or((key.as_str(), "none"));
        for (joint, total) in totals.iter().enumerate() {
            writeln!(
                per_joint_csv,
                "{method},{smoothing},{joint},{}",
                total / reports.len() as f64
            )
            .unwrap();
        }
    }
    super::write_csv(&out.join("per_joint.csv"), &per_joint_csv)?;

    write_heatmaps(cfg, &spec)?;

    // Measurement outputs (wall clock; excluded from byte-reproducibility).
    let mut latency_csv =
        String::from("fold,seq_id,method,smoothing,attribution_ms,smoothing_ms,total_ms\n");
    for report in &reports {
        for row in &report.rows {
            writeln!(
                latency_csv,
                "{},{},{},{},{},{},{}",
                row.fold,
                row.seq_id,
                row.method,
                row.smoothing,
                row.attribution_ms,
                row.smoothing_ms,
                row.latency_ms()
            )
            .unwrap();
        }
    }
    super::write_csv(&out.join("latency.csv"), &latency_csv)?;

    let mut fig7_csv = String::from("method,smoothing,latency_mean_ms,aup_mean\n");
    for cell in &summary.cells {
        writeln!(
            fig7_csv,
            "{},{},{},{}",
            cell.method, cell.smoothing, cell.latency_mean_ms, cell.aup_mean
        )
        .unwrap();
    }
    super::write_csv(&out.join("faithfulness_latency.csv"), &fig7_csv)?;

    RunManifest::new("evaluate", cfg).write(&out)?;

    for cell in &summary.cells {
        println!(
            "{} | {}: AUP {:.4} ± {:.4}  TV {:.3e} ± {:.3e}",
            cell.method, cell.smoothing, cell.aup_mean, cell.aup_sd, cell.tv_mean, cell.tv_sd
        );
    }
    Ok(())
}
