//! Per-command run manifests: config hash, seeds, artifact version.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::config::ExperimentConfig;
use tshap_core::Result;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub artifact_version: String,
    pub command: String,
    pub config_hash: String,
    pub global_seed: u64,
    pub generator_seed: u64,
    pub model_seed: u64,
    pub config: ExperimentConfig,
}

impl RunManifest {
    pub fn new(command: &str, config: &ExperimentConfig) -> Self {
        Self {
            artifact_version: env!("CARGO_PKG_VERSION").to_string(),
            command: command.to_string(),
            config_hash: config.config_hash(),
            global_seed: config.seed,
            generator_seed: config.generator.seed,
            model_seed: config.model.seed,
            config: config.clone(),
        }
    }

    pub fn write(&self, out_dir: &Path) -> Result<()> {
        let path = out_dir.join(format!("manifest_{}.json", self.command));
        tshap_core::io::write_json(&path, self)
    }
}
