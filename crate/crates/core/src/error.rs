//! Error type shared across the library.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum TshapError {
    /// A caller violated an operation precondition.
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// Input is structurally valid but numerically unusable (e.g. zero body height).
    #[error("degenerate input: {0}")]
    DegenerateInput(String),

    /// A non-finite value appeared mid-computation; names the offending tensor.
    #[error("numeric overflow in tensor `{tensor}`")]
    NumericOverflow { tensor: String },

    /// Training loss became non-finite.
    #[error("training diverged at epoch {epoch}")]
    TrainingFailure { epoch: usize },

    /// An operation received a model of the wrong architecture.
    #[error("wrong model kind: expected {expected}, got {actual}")]
    WrongModelKind { expected: String, actual: String },

    /// Paired test on differences with zero sample variance.
    #[error("degenerate variance: all paired differences are equal")]
    DegenerateVariance,

    /// Metric undefined for this input shape.
    #[error("undefined metric: {0}")]
    UndefinedMetric(String),

    /// Perturbation baseline probability is zero; drops cannot be normalized.
    #[error("degenerate baseline: unmasked target-class probability is 0")]
    DegenerateBaseline,

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),

    #[error("serialization error: {0}")]
    Json(#[from] serde_json::Error),

    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, TshapError>;

impl TshapError {
    pub fn invalid(msg: impl Into<String>) -> Self {
        TshapError::InvalidArgument(msg.into())
    }

    pub fn degenerate(msg: impl Into<String>) -> Self {
        TshapError::DegenerateInput(msg.into())
    }

    pub fn non_finite(tensor: impl Into<String>) -> Self {
        TshapError::NumericOverflow {
            tensor: tensor.into(),
        }
    }
}
