//! `tshap generate` — synthesize the dataset and write CSV + manifest.

use crate::config::ExperimentConfig;
use crate::manifest::RunManifest;
use tshap_core::data::{
    generate_dataset, preprocess, write_dataset_csv, DatasetManifest, FeatureSequence,
};
use tshap_core::Result;

pub fn run(cfg: &ExperimentConfig) -> Result<()> {
    let out = super::out_dir(cfg);
    std::fs::create_dir_all(&out)?;

    let raw = generate_dataset(&cfg.generator)?;
    let data: Vec<FeatureSequence> = raw
        .iter()
        .map(|s| preprocess(s, cfg.model.sequence_length))
        .collect::<Result<_>>()?;

    write_dataset_csv(&super::dataset_path(cfg), &data)?;
    let manifest = DatasetManifest::from_dataset(&data, &cfg.generator);
    tshap_core::io::write_json(&out.join("dataset_manifest.json"), &manifest)?;
    RunManifest::new("generate", cfg).write(&out)?;

    println!(
        "generated {} sequences ({} subjects, T = {})",
        manifest.n_sequences, manifest.n_subjects, manifest.sequence_length
    );
    for (label, count) in &manifest.per_class_counts {
        let name = tshap_core::data::ActivityClass::from_label(*label)
            .map(|c| c.name())
            .unwrap_or("unknown");
        println!("  class {label} ({name}): {count}");
    }
    println!("wrote {}", super::dataset_path(cfg).display());
    Ok(())
}
