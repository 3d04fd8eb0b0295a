//! Per-frame feature attributions: exact and sampled Shapley values,
//! input×gradient saliency, and Grad-CAM on the CNN baseline.
//!
//! Every method uses the zero-masking convention: an absent feature is
//! represented by the value 0 in normalized coordinates, and attributing a
//! frame leaves all other frames at their observed values.

mod gradcam;
mod io;
mod masking;
mod saliency;
mod shapley;

pub use gradcam::{grad_cam, grad_cam_map};
pub use io::{attribution_to_csv, write_attribution_csv, AttributionSidecar};
pub use masking::mask_features;
pub use saliency::gradient_saliency;
pub use shapley::{
    exact_shapley_frame, exact_shapley_game, sampled_shapley, sampled_shapley_game, shapley_full,
    shapley_full_fast, Coalition, ShapMode, EXACT_PLAYER_LIMIT,
};

use serde::{Deserialize, Serialize};

use crate::data::{COORDS, FEATURE_DIM, JOINT_COUNT};
use crate::error::{Result, TshapError};
use crate::linalg::Mat;

/// Whether a map scores individual features or body-part groups.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Granularity {
    PerFeature,
    PerGroup,
}

/// Assignment of the 75 features to attribution players.
///
/// The default six body-part grouping keeps exact enumeration at 2⁶ model
/// evaluations per frame; the 75-feature granularity is for sampling only.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Grouping {
    pub granularity: Granularity,
    pub n_players: usize,
    /// feature index → player index, length 75.
    pub feature_to_group: Vec<usize>,
}

/// Joint memberships of the six body-part players, in player order:
/// trunk, head, left arm, right arm, left leg, right leg.
pub const BODY_PART_JOINTS: [&[usize]; 6] = [
    &[0, 1, 20],
    &[2, 3],
    &[4, 5, 6, 7, 21, 22],
    &[8, 9, 10, 11, 23, 24],
    &[12, 13, 14, 15],
    &[16, 17, 18, 19],
];

pub const BODY_PART_NAMES: [&str; 6] = [
    "trunk",
    "head",
    "left_arm",
    "right_arm",
    "left_leg",
    "right_leg",
];

impl Grouping {
    /// One player per feature (75 players per frame).
    pub fn per_feature() -> Self {
        Self {
            granularity: Granularity::PerFeature,
            n_players: FEATURE_DIM,
            feature_to_group: (0..FEATURE_DIM).collect(),
        }
    }

    /// Six body-part players per frame over the 25-joint map.
    pub fn body_parts() -> Self {
        let mut joint_to_group = [usize::MAX; JOINT_COUNT];
        for (group, joints) in BODY_PART_JOINTS.iter().enumerate() {
            for &j in *joints {
                joint_to_group[j] = group;
            }
        }
        debug_assert!(joint_to_group.iter().all(|&g| g < 6));
        let feature_to_group = (0..FEATURE_DIM)
            .map(|i| joint_to_group[i / COORDS])
            .collect();
        Self {
            granularity: Granularity::PerGroup,
            n_players: BODY_PART_JOINTS.len(),
            feature_to_group,
        }
    }

    /// Feature indices belonging to `player`.
    pub fn members(&self, player: usize) -> Vec<usize> {
        self.feature_to_group
            .iter()
            .enumerate()
            .filter(|(_, &g)| g == player)
            .map(|(i, _)| i)
            .collect()
    }
}

/// A T×G matrix of per-frame contributions toward one target class.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AttributionMap {
    pub values: Mat,
    pub granularity: Granularity,
    /// feature index → column index; present when `granularity` is grouped.
    pub group_map: Option<Vec<usize>>,
    pub target_class: usize,
    pub method: String,
}

impl AttributionMap {
    pub fn new(
        values: Mat,
        granularity: Granularity,
        group_map: Option<Vec<usize>>,
        target_class: usize,
        method: impl Into<String>,
    ) -> Result<Self> {
        let map = Self {
            values,
            granularity,
            group_map,
            target_class,
            method: method.into(),
        };
        map.validate()?;
        Ok(map)
    }

    pub fn from_grouping(
        values: Mat,
        grouping: &Grouping,
        target_class: usize,
        method: impl Into<String>,
    ) -> Result<Self> {
        let group_map = match grouping.granularity {
            Granularity::PerFeature => None,
            Granularity::PerGroup => Some(grouping.feature_to_group.clone()),
        };
        Self::new(values, grouping.granularity, group_map, target_class, method)
    }

    pub fn validate(&self) -> Result<()> {
        if !self.values.is_finite() {
            return Err(TshapError::invalid("attribution values must be finite"));
        }
        match self.granularity {
            Granularity::PerFeature => {
                if self.values.cols() != FEATURE_DIM {
                    return Err(TshapError::invalid(format!(
                        "per-feature map must have {FEATURE_DIM} columns, got {}",
                        self.values.cols()
                    )));
                }
            }
            Granularity::PerGroup => {
                let map = self.group_map.as_ref().ok_or_else(|| {
                    TshapError::invalid("grouped map requires a group_map")
                })?;
                if map.len() != FEATURE_DIM {
                    return Err(TshapError::invalid("group_map must cover all 75 features"));
                }
                let g = self.values.cols();
                let mut seen = vec![false; g];
                for &group in map {
                    if group >= g {
                        return Err(TshapError::invalid(format!(
                            "group index {group} out of range (G = {g})"
                        )));
                    }
                    seen[group] = true;
                }
                if !seen.iter().all(|&s| s) {
                    return Err(TshapError::invalid("group_map must be surjective onto [0, G)"));
                }
            }
        }
        Ok(())
    }

    /// Sequence length T.
    pub fn len(&self) -> usize {
        self.values.rows()
    }

    pub fn is_empty(&self) -> bool {
        self.values.rows() == 0
    }

    /// Number of players per frame G.
    pub fn width(&self) -> usize {
        self.values.cols()
    }

    /// Score of the per-feature cell (t, feature); grouped maps hand every
    /// member its group's score unchanged.
    pub fn cell_score_inherit(&self, t: usize, feature: usize) -> f64 {
        match &self.group_map {
            None => self.values.get(t, feature),
            Some(map) => self.values.get(t, map[feature]),
        }
    }

    /// Score of the per-feature cell (t, feature) with group scores split
    /// evenly among members, so total mass is conserved.
    pub fn cell_score_distribute(&self, t: usize, feature: usize) -> f64 {
        match &self.group_map {
            None => self.values.get(t, feature),
            Some(map) => {
                let group = map[feature];
                let size = map.iter().filter(|&&g| g == group).count();
                self.values.get(t, group) / size as f64
            }
        }
    }

    /// Same shape and metadata, new values.
    pub fn with_values(&self, values: Mat, method: impl Into<String>) -> Self {
        Self {
            values,
            granularity: self.granularity,
            group_map: self.group_map.clone(),
            target_class: self.target_class,
            method: method.into(),
        }
    }
}

/// Cells to zero out: (frame, feature) pairs, deduplicated and bounds-checked.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct MaskSpec {
    cells: Vec<(usize, usize)>,
}

impl MaskSpec {
    pub fn new(mut cells: Vec<(usize, usize)>) -> Result<Self> {
        cells.sort_unstable();
        let before = cells.len();
        cells.dedup();
        if cells.len() != before {
            return Err(TshapError::invalid("mask contains duplicate cells"));
        }
        Ok(Self { cells })
    }

    pub fn empty() -> Self {
        Self::default()
    }

    pub fn cells(&self) -> &[(usize, usize)] {
        &self.cells
    }

    pub fn len(&self) -> usize {
        self.cells.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cells.is_empty()
    }
}
