//! Dataset serialization: frame-per-row CSV plus a JSON manifest.
//!
//! CSV layout (one row per frame):
//! `seq_id,subject_id,label,t,f0,...,f74`
//!
//! Floats are written with Rust's shortest round-trip formatting, so a
//! write→read→write cycle is byte-identical.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

use super::{FeatureSequence, FEATURE_DIM};
use crate::error::{Result, TshapError};
use crate::linalg::Mat;

/// Summary written alongside a generated dataset.
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct DatasetManifest {
    pub n_sequences: usize,
    pub n_subjects: usize,
    pub sequence_length: usize,
    pub per_class_counts: BTreeMap<usize, usize>,
    pub generator: super::GeneratorConfig,
}

impl DatasetManifest {
    pub fn from_dataset(sequences: &[FeatureSequence], generator: &super::GeneratorConfig) -> Self {
        let mut per_class_counts = BTreeMap::new();
        for seq in sequences {
            *per_class_counts.entry(seq.label).or_insert(0) += 1;
        }
        let subjects: std::collections::BTreeSet<u32> =
            sequences.iter().map(|s| s.subject_id).collect();
        Self {
            n_sequences: sequences.len(),
            n_subjects: subjects.len(),
            sequence_length: sequences.first().map_or(0, FeatureSequence::len),
            per_class_counts,
            generator: generator.clone(),
        }
    }
}

pub fn dataset_csv_header() -> String {
    let mut header = String::from("seq_id,subject_id,label,t");
    for i in 0..FEATURE_DIM {
        write!(header, ",f{i}").unwrap();
    }
    header
}

pub fn dataset_to_csv(sequences: &[FeatureSequence]) -> String {
    let mut out = dataset_csv_header();
    out.push('\n');
    for (seq_id, seq) in sequences.iter().enumerate() {
        for t in 0..seq.len() {
            write!(out, "{seq_id},{},{},{t}", seq.subject_id, seq.label).unwrap();
            for v in seq.data.row(t) {
                write!(out, ",{v}").unwrap();
            }
            out.push('\n');
        }
    }
    out
}

pub fn write_dataset_csv(path: &Path, sequences: &[FeatureSequence]) -> Result<()> {
    crate::io::write_atomic(path, dataset_to_csv(sequences).as_bytes())
}

pub fn dataset_from_csv(text: &str) -> Result<Vec<FeatureSequence>> {
    let mut lines = text.lines();
    let header = lines
        .next()
        .ok_or_else(|| TshapError::Parse("empty dataset CSV".into()))?;
    if header != dataset_csv_header() {
        return Err(TshapError::Parse("unexpected dataset CSV header".into()));
    }

    struct Pending {
        subject_id: u32,
        label: usize,
        rows: Vec<Vec<f64>>,
    }
    let mut by_seq: BTreeMap<usize, Pending> = BTreeMap::new();

    for (line_no, line) in lines.enumerate() {
        if line.is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 4 + FEATURE_DIM {
            return Err(TshapError::Parse(format!(
                "line {}: expected {} fields, got {}",
                line_no + 2,
                4 + FEATURE_DIM,
                fields.len()
            )));
        }
        let parse_err = |what: &str| TshapError::Parse(format!("line {}: bad {what}", line_no + 2));
        let seq_id: usize = fields[0].parse().map_err(|_| parse_err("seq_id"))?;
        let subject_id: u32 = fields[1].parse().map_err(|_| parse_err("subject_id"))?;
        let label: usize = fields[2].parse().map_err(|_| parse_err("label"))?;
        let t: usize = fields[3].parse().map_err(|_| parse_err("t"))?;
        let mut row = Vec::with_capacity(FEATURE_DIM);
        for raw in &fields[4..] {
            row.push(raw.parse::<f64>().map_err(|_| parse_err("feature value"))?);
        }
        let entry = by_seq.entry(seq_id).or_insert(Pending {
            subject_id,
            label,
            rows: Vec::new(),
        });
        if t != entry.rows.len() {
            return Err(TshapError::Parse(format!(
                "line {}: frames of sequence {seq_id} out of order",
                line_no + 2
            )));
        }
        entry.rows.push(row);
    }

    let mut sequences = Vec::with_capacity(by_seq.len());
    for (expected_id, (seq_id, pending)) in by_seq.into_iter().enumerate() {
        if seq_id != expected_id {
            return Err(TshapError::Parse(format!(
                "sequence ids not contiguous at {seq_id}"
            )));
        }
        sequences.push(FeatureSequence::new(
            Mat::from_rows(&pending.rows),
            pending.label,
            pending.subject_id,
        )?);
    }
    Ok(sequences)
}

pub fn read_dataset_csv(path: &Path) -> Result<Vec<FeatureSequence>> {
    dataset_from_csv(&std::fs::read_to_string(path)?)
}
