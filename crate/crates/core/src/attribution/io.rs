//! Attribution map serialization.
//!
//! CSV layout (one row per (frame, player) cell):
//! `seq_id,method,t,group,value`
//!
//! A JSON sidecar records the metadata needed to interpret the values.

use std::fmt::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{AttributionMap, Granularity};
use crate::error::Result;

/// Metadata companion for an attribution CSV.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AttributionSidecar {
    pub granularity: Granularity,
    pub group_map: Option<Vec<usize>>,
    pub target_class: usize,
    pub method: String,
    pub seed: Option<u64>,
    pub n_permutations: Option<usize>,
}

impl AttributionSidecar {
    pub fn for_map(map: &AttributionMap, seed: Option<u64>, n_permutations: Option<usize>) -> Self {
        Self {
            granularity: map.granularity,
            group_map: map.group_map.clone(),
            target_class: map.target_class,
            method: map.method.clone(),
            seed,
            n_permutations,
        }
    }
}

pub fn attribution_csv_header() -> &'static str {
    "seq_id,method,t,group,value"
}

pub fn attribution_to_csv(entries: &[(usize, &AttributionMap)]) -> String {
    let mut out = String::from(attribution_csv_header());
    out.push('\n');
    for &(seq_id, map) in entries {
        for t in 0..map.len() {
            for g in 0..map.width() {
                writeln!(out, "{seq_id},{},{t},{g},{}", map.method, map.values.get(t, g))
                    .unwrap();
            }
        }
    }
    out
}

pub fn write_attribution_csv(path: &Path, entries: &[(usize, &AttributionMap)]) -> Result<()> {
    crate::io::write_atomic(path, attribution_to_csv(entries).as_bytes())
}
