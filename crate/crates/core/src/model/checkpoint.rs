//! JSON model checkpoints.
//!
//! Tensors are stored as flat row-major arrays with their shapes; floats use
//! shortest round-trip formatting, so save→load→save is bit-exact.

use std::path::Path;

use serde::{Deserialize, Serialize};

use super::TrainedModel;
use crate::error::{Result, TshapError};

const CHECKPOINT_VERSION: u32 = 1;

#[derive(Serialize, Deserialize)]
struct Checkpoint {
    format_version: u32,
    model: TrainedModel,
}

pub fn save_checkpoint(path: &Path, model: &TrainedModel) -> Result<()> {
    crate::io::write_json(
        path,
        &Checkpoint {
            format_version: CHECKPOINT_VERSION,
            model: model.clone(),
        },
    )
}

pub fn load_checkpoint(path: &Path) -> Result<TrainedModel> {
    let text = std::fs::read_to_string(path)?;
    let checkpoint: Checkpoint = serde_json::from_str(&text)?;
    if checkpoint.format_version != CHECKPOINT_VERSION {
        return Err(TshapError::Parse(format!(
            "unsupported checkpoint version {}",
            checkpoint.format_version
        )));
    }
    Ok(checkpoint.model)
}
