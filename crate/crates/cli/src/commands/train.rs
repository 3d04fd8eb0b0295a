//! `tshap train` — one model per fold on the other k−1 folds, with
//! per-fold classification metrics and checkpoints.

use std::fmt::Write as _;

use serde::Serialize;

use crate::config::{ExperimentConfig, MethodChoice};
use crate::manifest::RunManifest;
use tshap_core::data::FeatureSequence;
use tshap_core::linalg::{mean, sample_std};
use tshap_core::model::{save_checkpoint, train, Classifier, ModelConfig, ModelKind, TrainedModel};
use tshap_core::Result;

/// Accuracy plus positive-class (fall) precision/recall/F1 on one fold.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct FoldMetrics {
    pub fold: usize,
    pub accuracy: f64,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
}

/// Confusion counts of the fall class (effective label 0) vs the rest.
pub fn fall_metrics(
    model: &TrainedModel,
    sequences: &[&FeatureSequence],
    fold: usize,
) -> Result<FoldMetrics> {
    let mut correct = 0usize;
    let (mut tp, mut fp, mut fn_count) = (0usize, 0usize, 0usize);
    for seq in sequences {
        let truth = model.config.effective_label(seq.label);
        let (pred, _) = model.predict(seq)?;
        if pred == truth {
            correct += 1;
        }
        match (pred == 0, truth == 0) {
            (true, true) => tp += 1,
            (true, false) => fp += 1,
            (false, true) => fn_count += 1,
            (false, false) => {}
        }
    }
    let precision = if tp + fp > 0 {
        tp as f64 / (tp + fp) as f64
    } else {
        0.0
    };
    let recall = if tp + fn_count > 0 {
        tp as f64 / (tp + fn_count) as f64
    } else {
        0.0
    };
    let f1 = if precision + recall > 0.0 {
        2.0 * precision * recall / (precision + recall)
    } else {
        0.0
    };
    Ok(FoldMetrics {
        fold,
        accuracy: correct as f64 / sequences.len().max(1) as f64,
        precision,
        recall,
        f1,
    })
}

#[derive(Serialize)]
struct TrainSummary {
    accuracy_mean: f64,
    accuracy_sd: f64,
    precision_mean: f64,
    precision_sd: f64,
    recall_mean: f64,
    recall_sd: f64,
    f1_mean: f64,
    f1_sd: f64,
}

pub fn run(cfg: &ExperimentConfig) -> Result<()> {
    let out = super::out_dir(cfg);
    std::fs::create_dir_all(&out)?;
    let data = super::load_dataset(cfg)?;
    let folds = super::folds_of(cfg, &data)?;
    tshap_core::io::write_json(&out.join("folds.json"), &folds)?;

    let needs_cnn = cfg.attribution.methods.contains(&MethodChoice::Gradcam);
    let mut history_csv = String::from("fold,model,epoch,loss,accuracy\n");
    let mut fold_rows = Vec::new();

    for fold in 0..cfg.k {
        let train_set: Vec<FeatureSequence> = folds
            .train_indices(&data, fold)
            .into_iter()
            .map(|i| data[i].clone())
            .collect();
        let test_refs: Vec<&FeatureSequence> = folds
            .test_indices(&data, fold)
            .into_iter()
            .map(|i| &data[i])
            .collect();

        let fold_cfg = ModelConfig {
            seed: super::fold_model_seed(cfg, fold),
            ..cfg.model.clone()
        };
        let model = train(&train_set, &fold_cfg)?;
        for stats in &model.history {
            writeln!(
                history_csv,
                "{fold},{},{},{},{}",
                model.kind(),
                stats.epoch,
                stats.loss,
                stats.accuracy
            )
            .unwrap();
        }
        save_checkpoint(&super::checkpoint_path(cfg, fold), &model)?;

        if needs_cnn {
            let cnn_cfg = ModelConfig {
                kind: ModelKind::Cnn,
                ..fold_cfg.clone()
            };
            let cnn = train(&train_set, &cnn_cfg)?;
            for stats in &cnn.history {
                writeln!(
                    history_csv,
                    "{fold},{},{},{},{}",
                    cnn.kind(),
                    stats.epoch,
                    stats.loss,
                    stats.accuracy
                )
                .unwrap();
            }
            save_checkpoint(&super::cnn_checkpoint_path(cfg, fold), &cnn)?;
        }

        let metrics = fall_metrics(&model, &test_refs, fold)?;
        println!(
            "fold {fold}: accuracy {:.4}  precision {:.4}  recall {:.4}  f1 {:.4}",
            metrics.accuracy, metrics.precision, metrics.recall, metrics.f1
        );
        fold_rows.push(metrics);
    }

    let mut metrics_csv = String::from("fold,accuracy,precision,recall,f1\n");
    for m in &fold_rows {
        writeln!(
            metrics_csv,
            "{},{},{},{},{}",
            m.fold, m.accuracy, m.precision, m.recall, m.f1
        )
        .unwrap();
    }
    super::write_csv(&out.join("history.csv"), &history_csv)?;
    super::write_csv(&out.join("fold_metrics.csv"), &metrics_csv)?;

    let take = |f: fn(&FoldMetrics) -> f64| -> Vec<f64> { fold_rows.iter().map(f).collect() };
    let accuracy = take(|m| m.accuracy);
    let precision = take(|m| m.precision);
    let recall = take(|m| m.recall);
    let f1 = take(|m| m.f1);
    let summary = TrainSummary {
        accuracy_mean: mean(&accuracy),
        accuracy_sd: sample_std(&accuracy),
        precision_mean: mean(&precision),
        precision_sd: sample_std(&precision),
        recall_mean: mean(&recall),
        recall_sd: sample_std(&recall),
        f1_mean: mean(&f1),
        f1_sd: sample_std(&f1),
    };
    tshap_core::io::write_json(&out.join("train_summary.json"), &summary)?;
    RunManifest::new("train", cfg).write(&out)?;

    println!(
        "mean accuracy {:.4} ± {:.4} over {} folds",
        summary.accuracy_mean, summary.accuracy_sd, cfg.k
    );
    Ok(())
}
