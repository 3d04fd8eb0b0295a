//! `tshap ablate` — uniform vs EWMA smoothing with AUP and numeric
//! temporal variance (raw row included for reference).

use std::fmt::Write as _;

use crate::config::ExperimentConfig;
use crate::manifest::RunManifest;
use tshap_core::linalg::{mean, sample_std};
use tshap_core::metrics::CompareSpec;
use tshap_core::smoothing::SmoothingConfig;
use tshap_core::{Result, TshapError};

/// Smoothing pair under ablation: the configured uniform window (default
/// w = 2) and the configured EWMA coefficient (default α = 0.4).
fn ablation_pair(cfg: &ExperimentConfig) -> (SmoothingConfig, SmoothingConfig) {
    let uniform = cfg
        .smoothing
        .iter()
        .find(|s| matches!(s, SmoothingConfig::Uniform { .. }))
        .copied()
        .unwrap_or(SmoothingConfig::uniform(2));
    let ewma = cfg
        .smoothing
        .iter()
        .find(|s| matches!(s, SmoothingConfig::Ewma { .. }))
        .copied()
        .unwrap_or(SmoothingConfig::ewma(0.4));
    (uniform, ewma)
}

pub fn run(cfg: &ExperimentConfig) -> Result<()> {
    let out = super::out_dir(cfg);
    std::fs::create_dir_all(&out)?;

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
        .ok_or_else(|| TshapError::invalid("ablate needs shap in attribution.methods"))?;
    let (uniform, ewma) = ablation_pair(cfg);
    let spec = CompareSpec {
        methods: vec![shap],
        smoothings: vec![None, Some(uniform), Some(ewma)],
        fractions: cfg.evaluation.fractions.clone(),
        grouping: cfg.grouping(),
        seed: cfg.seed,
        abs_rank: cfg.evaluation.abs_rank,
    };

    let (reports, _) = super::evaluate::run_all_folds(cfg, &spec)?;

    let mut csv = String::from("method,aup_mean,aup_sd,tv_mean,tv_sd\n");
    for entry in &spec.smoothings {
        let (label, tag) = match entry {
            None => ("raw".to_string(), "none".to_string()),
            Some(s @ SmoothingConfig::Uniform { .. }) => ("uniform".to_string(), s.method_tag()),
            Some(s @ SmoothingConfig::Ewma { .. }) => ("ewma".to_string(), s.method_tag()),
        };
        let fold_aups: Vec<f64> = reports
            .iter()
            .map(|r| {
                let v: Vec<f64> = r
                    .rows
                    .iter()
                    .filter(|row| row.smoothing == tag)
                    .map(|row| row.aup)
                    .collect();
                mean(&v)
            })
            .collect();
        let fold_tvs: Vec<f64> = reports
            .iter()
            .map(|r| {
                let v: Vec<f64> = r
                    .rows
                    .iter()
                    .filter(|row| row.smoothing == tag)
                    .map(|row| row.tv)
                    .collect();
                mean(&v)
            })
            .collect();
        writeln!(
            csv,
            "{label},{},{},{},{}",
            mean(&fold_aups),
            sample_std(&fold_aups),
            mean(&fold_tvs),
            sample_std(&fold_tvs)
        )
        .unwrap();
        println!(
            "{label}: AUP {:.4} ± {:.4}  TV {:.3e} ± {:.3e}",
            mean(&fold_aups),
            sample_std(&fold_aups),
            mean(&fold_tvs),
            sample_std(&fold_tvs)
        );
    }
    super::write_csv(&out.join("ablate.csv"), &csv)?;
    RunManifest::new("ablate", cfg).write(&out)?;
    Ok(())
}
