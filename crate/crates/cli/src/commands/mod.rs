//! Subcommand implementations and shared artifact plumbing.

pub mod ablate;
pub mod evaluate;
pub mod explain;
pub mod generate;
pub mod report;
pub mod sweep;
pub mod train;

use std::path::{Path, PathBuf};

use crate::config::{ExperimentConfig, MethodChoice};
use tshap_core::data::{kfold_split, read_dataset_csv, FeatureSequence, FoldAssignment};
use tshap_core::model::{load_checkpoint, TrainedModel};
use tshap_core::rng::SplitMix64;
use tshap_core::{Result, TshapError};

pub fn out_dir(cfg: &ExperimentConfig) -> PathBuf {
    PathBuf::from(&cfg.output_dir)
}

pub fn dataset_path(cfg: &ExperimentConfig) -> PathBuf {
    out_dir(cfg).join("dataset.csv")
}

pub fn checkpoint_path(cfg: &ExperimentConfig, fold: usize) -> PathBuf {
    out_dir(cfg).join(format!("model_fold{fold}.json"))
}

pub fn cnn_checkpoint_path(cfg: &ExperimentConfig, fold: usize) -> PathBuf {
    out_dir(cfg).join(format!("cnn_fold{fold}.json"))
}

/// Loads the generated dataset, failing with a config-level diagnostic when
/// the pipeline was run out of order.
pub fn load_dataset(cfg: &ExperimentConfig) -> Result<Vec<FeatureSequence>> {
    let path = dataset_path(cfg);
    if !path.exists() {
        return Err(TshapError::invalid(format!(
            "{} not found; run `tshap generate` first",
            path.display()
        )));
    }
    read_dataset_csv(&path)
}

pub fn folds_of(cfg: &ExperimentConfig, data: &[FeatureSequence]) -> Result<FoldAssignment> {
    kfold_split(data, cfg.k, cfg.seed)
}

pub fn load_fold_model(cfg: &ExperimentConfig, fold: usize) -> Result<TrainedModel> {
    let path = checkpoint_path(cfg, fold);
    if !path.exists() {
        return Err(TshapError::invalid(format!(
            "{} not found; run `tshap train` first",
            path.display()
        )));
    }
    load_checkpoint(&path)
}

pub fn load_fold_cnn(cfg: &ExperimentConfig, fold: usize) -> Result<Option<TrainedModel>> {
    if !cfg.attribution.methods.contains(&MethodChoice::Gradcam) {
        return Ok(None);
    }
    let path = cnn_checkpoint_path(cfg, fold);
    if !path.exists() {
        return Err(TshapError::invalid(format!(
            "{} not found; run `tshap train` first (grad_cam needs the CNN baseline)",
            path.display()
        )));
    }
    Ok(Some(load_checkpoint(&path)?))
}

/// Seed for the fold's model initialization and shuffle streams.
pub fn fold_model_seed(cfg: &ExperimentConfig, fold: usize) -> u64 {
    SplitMix64::derive(cfg.model.seed, &[50, fold as u64])
}

/// Test-set sequence ids evaluated for a fold, after the per-fold cap.
pub fn eval_ids(
    cfg: &ExperimentConfig,
    folds: &FoldAssignment,
    data: &[FeatureSequence],
    fold: usize,
) -> Vec<usize> {
    let ids = folds.test_indices(data, fold);
    let cap = cfg.evaluation.eval_sequences_per_fold;
    if cap == 0 {
        ids
    } else {
        ids.into_iter().take(cap).collect()
    }
}

/// Turns a method tag like `tshap[w=2]` into a filename fragment.
pub fn sanitize_tag(tag: &str) -> String {
    let mut out = String::with_capacity(tag.len());
    let mut last_underscore = false;
    for ch in tag.chars() {
        if ch.is_ascii_alphanumeric() || ch == '.' || ch == '-' {
            out.push(ch);
            last_underscore = false;
        } else if !last_underscore && !out.is_empty() {
            out.push('_');
            last_underscore = true;
        }
    }
    out.trim_end_matches('_').to_string()
}

/// Writes a small CSV atomically.
pub fn write_csv(path: &Path, content: &str) -> Result<()> {
    tshap_core::io::write_atomic(path, content.as_bytes())
}
