//! Synthetic skeleton sequences: generation, preprocessing, partitioning.
//!
//! The 25-joint layout follows the common depth-camera convention with the
//! spine base first (see the joint table in the README). Joint 0 is the hip
//! base used for centering; the vertical axis is coordinate index 1.

mod generator;
mod io;
mod preprocess;
mod split;

pub use generator::{generate_dataset, synth_sequence, ActivityClass, GeneratorConfig};
pub use io::{
    dataset_from_csv, dataset_to_csv, read_dataset_csv, write_dataset_csv, DatasetManifest,
};
pub use preprocess::{devectorize, normalize, preprocess, resample, vectorize};
pub use split::{kfold_split, FoldAssignment};

use crate::error::{Result, TshapError};
use crate::linalg::Mat;

/// Number of skeleton joints per frame.
pub const JOINT_COUNT: usize = 25;
/// Coordinates per joint (x lateral, y vertical, z depth).
pub const COORDS: usize = 3;
/// Flattened feature width: 25 joints × 3 coordinates.
pub const FEATURE_DIM: usize = JOINT_COUNT * COORDS;
/// Joint used as the body center for normalization (spine/hip base).
pub const HIP_JOINT: usize = 0;
/// Index of the vertical coordinate within a joint triple.
pub const VERTICAL: usize = 1;

pub type Frame = [[f64; COORDS]; JOINT_COUNT];

/// A variable-length recorded skeleton sequence in meters.
#[derive(Debug, Clone, PartialEq)]
pub struct RawSkeletonSequence {
    pub frames: Vec<Frame>,
    pub subject_id: u32,
    pub class_label: usize,
}

impl RawSkeletonSequence {
    pub fn new(frames: Vec<Frame>, subject_id: u32, class_label: usize) -> Result<Self> {
        if frames.is_empty() {
            return Err(TshapError::invalid("sequence must have at least one frame"));
        }
        for (t, frame) in frames.iter().enumerate() {
            for (j, joint) in frame.iter().enumerate() {
                if joint.iter().any(|c| !c.is_finite()) {
                    return Err(TshapError::invalid(format!(
                        "non-finite coordinate at frame {t}, joint {j}"
                    )));
                }
            }
        }
        Ok(Self {
            frames,
            subject_id,
            class_label,
        })
    }

    pub fn length(&self) -> usize {
        self.frames.len()
    }

    /// Vertical position of the hip-base joint at frame `t`.
    pub fn hip_height(&self, t: usize) -> f64 {
        self.frames[t][HIP_JOINT][VERTICAL]
    }
}

/// A preprocessed fixed-length T×75 feature matrix with its labels.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureSequence {
    pub data: Mat,
    pub label: usize,
    pub subject_id: u32,
}

impl FeatureSequence {
    pub fn new(data: Mat, label: usize, subject_id: u32) -> Result<Self> {
        if data.cols() != FEATURE_DIM {
            return Err(TshapError::invalid(format!(
                "feature matrix must have {FEATURE_DIM} columns, got {}",
                data.cols()
            )));
        }
        if !data.is_finite() {
            return Err(TshapError::invalid("feature matrix contains non-finite entries"));
        }
        Ok(Self {
            data,
            label,
            subject_id,
        })
    }

    /// Sequence length T.
    pub fn len(&self) -> usize {
        self.data.rows()
    }

    pub fn is_empty(&self) -> bool {
        self.data.rows() == 0
    }

    /// Matrix entry for (frame, joint, coordinate).
    pub fn joint_coord(&self, t: usize, joint: usize, coord: usize) -> f64 {
        self.data.get(t, joint * COORDS + coord)
    }
}
