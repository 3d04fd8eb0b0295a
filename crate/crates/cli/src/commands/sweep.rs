//! `tshap sweep-w` — window-size sensitivity: AUP per w with the (constant)
//! classification accuracy, mean ± sd across folds.

use std::fmt::Write as _;

use crate::config::ExperimentConfig;
use crate::manifest::RunManifest;
use tshap_core::linalg::{mean, sample_std};
use tshap_core::metrics::CompareSpec;
use tshap_core::smoothing::SmoothingConfig;
use tshap_core::{Result, TshapError};

pub fn run(cfg: &ExperimentConfig, windows: &[usize]) -> Result<()> {
    if windows.is_empty() {
        return Err(TshapError::invalid("sweep needs at least one window size"));
    }
    let out = super::out_dir(cfg);
    std::fs::create_dir_all(&out)?;

    // Shap raw plus one uniform smoothing per window; the raw map is
    // computed once per sequence and shared.
    let shap = cfg
        .method_list()
        .into_iter()
        .find(|m| {
            matches!(
                m,
                tshap_core::metrics::AttributionMethod::ShapExact
                    | tshap_core::metrics::AttributionMethod::ShapSampled { .. }
            )
        })
        .ok_or_else(|| TshapError::invalid("sweep-w needs shap in attribution.methods"))?;
    let mut smoothings: Vec<Option<SmoothingConfig>> = vec![None];
    smoothings.extend(windows.iter().map(|&w| Some(SmoothingConfig::uniform(w))));
    let spec = CompareSpec {
        methods: vec![shap],
        smoothings,
        fractions: cfg.evaluation.fractions.clone(),
        grouping: cfg.grouping(),
        seed: cfg.seed,
        abs_rank: cfg.evaluation.abs_rank,
    };

    let (reports, _) = super::evaluate::run_all_folds(cfg, &spec)?;

    // Fold-level accuracy is a property of the model, not the smoothing.
    let accuracies: Vec<f64> = reports.iter().map(|r| r.lstm_accuracy).collect();
    let acc_mean = mean(&accuracies);
    let acc_sd = sample_std(&accuracies);

    let mut csv = String::from("w,aup_mean,aup_sd,accuracy_mean,accuracy_sd\n");
    let mut print_rows = Vec::new();
    for (slot, entry) in spec.smoothings.iter().enumerate() {
        let tag = match entry {
            None => "none".to_string(),
            Some(s) => s.method_tag(),
        };
        let per_fold: Vec<f64> = reports
            .iter()
            .map(|r| {
                let aups: Vec<f64> = r
                    .rows
                    .iter()
                    .filter(|row| row.smoothing == tag)
                    .map(|row| row.aup)
                    .collect();
                mean(&aups)
            })
            .collect();
        let label = match entry {
            None => "raw".to_string(),
            Some(SmoothingConfig::Uniform { w, .. }) => w.to_string(),
            Some(other) => other.method_tag(),
        };
        writeln!(
            csv,
            "{label},{},{},{acc_mean},{acc_sd}",
            mean(&per_fold),
            sample_std(&per_fold)
        )
        .unwrap();
        print_rows.push((label, mean(&per_fold), sample_std(&per_fold)));
        let _ = slot;
    }
    super::write_csv(&out.join("sweep_w.csv"), &csv)?;
    RunManifest::new("sweep-w", cfg).write(&out)?;

    println!("accuracy {acc_mean:.4} ± {acc_sd:.4} on the evaluated subset (constant across windows)");
    for (label, aup_mean, aup_sd) in print_rows {
        if label == "raw" {
            println!("raw:   AUP {aup_mean:.4} ± {aup_sd:.4}");
        } else {
            println!("w = {label}: AUP {aup_mean:.4} ± {aup_sd:.4}");
        }
    }
    Ok(())
}
