//! Subject-level k-fold partitioning.

use std::collections::{BTreeMap, BTreeSet};

use super::FeatureSequence;
use crate::error::{Result, TshapError};
use crate::rng::SplitMix64;

/// Assignment of every subject to exactly one fold.
#[derive(Debug, Clone, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub struct FoldAssignment {
    pub k: usize,
    pub fold_of_subject: BTreeMap<u32, usize>,
}

impl FoldAssignment {
    pub fn fold_of(&self, subject_id: u32) -> Option<usize> {
        self.fold_of_subject.get(&subject_id).copied()
    }

    /// Indices of sequences whose subject belongs to `fold` (the test set).
    pub fn test_indices(&self, sequences: &[FeatureSequence], fold: usize) -> Vec<usize> {
        sequences
            .iter()
            .enumerate()
            .filter(|(_, s)| self.fold_of(s.subject_id) == Some(fold))
            .map(|(i, _)| i)
            .collect()
    }

    /// Indices of sequences outside `fold` (the training set).
    pub fn train_indices(&self, sequences: &[FeatureSequence], fold: usize) -> Vec<usize> {
        sequences
            .iter()
            .enumerate()
            .filter(|(_, s)| self.fold_of(s.subject_id) != Some(fold))
            .map(|(i, _)| i)
            .collect()
    }
}

/// Shuffles the distinct subjects deterministically by `seed` and deals them
/// round-robin into `k` folds, so no subject's sequences ever span folds.
///
/// With the synthetic generator every subject performs each class once, so
/// per-fold class counts are automatically balanced to within one subject.
pub fn kfold_split(sequences: &[FeatureSequence], k: usize, seed: u64) -> Result<FoldAssignment> {
    if k < 2 {
        return Err(TshapError::invalid("k must be >= 2"));
    }
    let subjects: BTreeSet<u32> = sequences.iter().map(|s| s.subject_id).collect();
    if subjects.len() < k {
        return Err(TshapError::invalid(format!(
            "need at least {k} distinct subjects, got {}",
            subjects.len()
        )));
    }
    let mut order: Vec<u32> = subjects.into_iter().collect();
    let mut rng = SplitMix64::from_path(seed, &[2]);
    rng.shuffle(&mut order);

    let fold_of_subject = order
        .into_iter()
        .enumerate()
        .map(|(pos, subject)| (subject, pos % k))
        .collect();
    Ok(FoldAssignment { k, fold_of_subject })
}
