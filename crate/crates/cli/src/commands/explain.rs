//! `tshap explain` — attribution CSVs for one fold's test sequences:
//! shap (exact or sampled), the T-SHAP variants, saliency, and grad-cam.

use crate::config::{ExperimentConfig, MethodChoice, ShapModeChoice};
use crate::manifest::RunManifest;
use tshap_core::attribution::{
    grad_cam_map, gradient_saliency, shapley_full_fast, write_attribution_csv, AttributionMap,
    AttributionSidecar, ShapMode,
};
use tshap_core::model::Classifier;
use tshap_core::rng::SplitMix64;
use tshap_core::smoothing::smooth;
use tshap_core::{Result, TshapError};

fn write_method_csv(
    cfg: &ExperimentConfig,
    tag: &str,
    entries: &[(usize, AttributionMap)],
    seed: Option<u64>,
    n_permutations: Option<usize>,
) -> Result<()> {
    let out = super::out_dir(cfg);
    let stem = format!("attributions_{}", super::sanitize_tag(tag));
    let borrowed: Vec<(usize, &AttributionMap)> =
        entries.iter().map(|(id, m)| (*id, m)).collect();
    write_attribution_csv(&out.join(format!("{stem}.csv")), &borrowed)?;
    let sidecar = AttributionSidecar::for_map(&entries[0].1, seed, n_permutations);
    tshap_core::io::write_json(&out.join(format!("{stem}.json")), &sidecar)?;
    println!("wrote {stem}.csv ({} sequences)", entries.len());
    Ok(())
}

pub fn run(cfg: &ExperimentConfig, fold: usize) -> Result<()> {
    if fold >= cfg.k {
        return Err(TshapError::invalid(format!(
            "fold {fold} out of range (k = {})",
            cfg.k
        )));
    }
    let out = super::out_dir(cfg);
    std::fs::create_dir_all(&out)?;
    let data = super::load_dataset(cfg)?;
    let folds = super::folds_of(cfg, &data)?;
    let model = super::load_fold_model(cfg, fold)?;
    let cnn = super::load_fold_cnn(cfg, fold)?;
    let ids = super::eval_ids(cfg, &folds, &data, fold);
    if ids.is_empty() {
        return Err(TshapError::invalid(format!("fold {fold} has no test sequences")));
    }
    let grouping = cfg.grouping();

    // Raw SHAP maps, reused by every T-SHAP variant.
    let mut shap_maps: Vec<(usize, AttributionMap)> = Vec::new();
    if cfg.attribution.methods.contains(&MethodChoice::Shap) {
        for &i in &ids {
            let x = &data[i];
            let (target, _) = model.predict(x)?;
            let mode = match cfg.attribution.mode {
                ShapModeChoice::Exact => ShapMode::Exact,
                ShapModeChoice::Sampled => ShapMode::Sampled {
                    n_permutations: cfg.attribution.n_permutations,
                    seed: SplitMix64::derive(cfg.seed, &[40, i as u64]),
                },
            };
            shap_maps.push((i, shapley_full_fast(&model, x, &grouping, mode, target)?));
        }
        let (seed, n_perm) = match cfg.attribution.mode {
            ShapModeChoice::Exact => (None, None),
            ShapModeChoice::Sampled => (Some(cfg.seed), Some(cfg.attribution.n_permutations)),
        };
        let tag = shap_maps[0].1.method.clone();
        write_method_csv(cfg, &tag, &shap_maps, seed, n_perm)?;

        for smoothing_cfg in &cfg.smoothing {
            let smoothed: Vec<(usize, AttributionMap)> = shap_maps
                .iter()
                .map(|(i, map)| Ok((*i, smooth(map, smoothing_cfg)?)))
                .collect::<Result<_>>()?;
            let tag = smoothed[0].1.method.clone();
            write_method_csv(cfg, &tag, &smoothed, seed, n_perm)?;
        }
    }

    if cfg.attribution.methods.contains(&MethodChoice::Saliency) {
        let maps: Vec<(usize, AttributionMap)> = ids
            .iter()
            .map(|&i| {
                let x = &data[i];
                let (target, _) = model.predict(x)?;
                Ok((i, gradient_saliency(&model, x, target)?))
            })
            .collect::<Result<_>>()?;
        write_method_csv(cfg, "saliency", &maps, None, None)?;
    }

    if let Some(cnn_model) = &cnn {
        let maps: Vec<(usize, AttributionMap)> = ids
            .iter()
            .map(|&i| {
                let x = &data[i];
                let (target, _) = cnn_model.predict(x)?;
                Ok((i, grad_cam_map(cnn_model, x, &grouping, target)?))
            })
            .collect::<Result<_>>()?;
        write_method_csv(cfg, "gradcam", &maps, None, None)?;
    }

    RunManifest::new("explain", cfg).write(&out)?;
    Ok(())
}
