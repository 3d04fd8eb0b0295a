//! Temporal classifiers: configuration, forward surfaces, training, and
//! checkpointing.

mod checkpoint;
mod cnn;
mod cost;
mod lstm;
mod train;

pub use checkpoint::{load_checkpoint, save_checkpoint};
pub use cnn::{cnn_backward, cnn_forward, cnn_forward_cached, CnnCache, CnnParameters};
pub use cost::{cost_model, param_count, Architecture};
pub use lstm::{
    lstm_backward, lstm_forward, lstm_forward_cached, lstm_forward_suffix, LstmCache,
    LstmParameters,
};
pub use train::{batch_loss, loss_and_grad, train, EpochStats};

use serde::{Deserialize, Serialize};

use crate::data::FeatureSequence;
use crate::error::{Result, TshapError};
use crate::linalg::Mat;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ModelKind {
    Lstm,
    Cnn,
}

impl std::fmt::Display for ModelKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            ModelKind::Lstm => write!(f, "lstm"),
            ModelKind::Cnn => write!(f, "cnn"),
        }
    }
}

/// Training and architecture settings.
///
/// Defaults: 75 input features, 128 hidden units, T = 100, Adam at
/// learning rate 0.001, batch size 32.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ModelConfig {
    pub kind: ModelKind,
    pub input_dim: usize,
    pub hidden_dim: usize,
    pub class_count: usize,
    pub sequence_length: usize,
    pub learning_rate: f64,
    pub batch_size: usize,
    pub epochs: usize,
    pub seed: u64,
    /// Collapse labels to fall (0) vs. everything else before training.
    pub binary_mode: bool,
    /// Temporal kernel width of the CNN baseline (odd).
    pub cnn_kernel: usize,
}

impl Default for ModelConfig {
    fn default() -> Self {
        Self {
            kind: ModelKind::Lstm,
            input_dim: 75,
            hidden_dim: 128,
            class_count: 4,
            sequence_length: 100,
            learning_rate: 0.001,
            batch_size: 32,
            epochs: 20,
            seed: 7,
            binary_mode: false,
            cnn_kernel: 5,
        }
    }
}

impl ModelConfig {
    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("input_dim", self.input_dim),
            ("hidden_dim", self.hidden_dim),
            ("class_count", self.class_count),
            ("sequence_length", self.sequence_length),
            ("batch_size", self.batch_size),
            ("epochs", self.epochs),
        ];
        for (name, value) in positive {
            if value < 1 {
                return Err(TshapError::invalid(format!("{name} must be >= 1")));
            }
        }
        if self.learning_rate.is_nan() || self.learning_rate <= 0.0 || !self.learning_rate.is_finite() {
            return Err(TshapError::invalid("learning_rate must be > 0"));
        }
        if self.cnn_kernel % 2 == 0 {
            return Err(TshapError::invalid("cnn_kernel must be odd"));
        }
        if self.binary_mode && self.class_count != 2 {
            return Err(TshapError::invalid(
                "binary_mode requires class_count = 2",
            ));
        }
        Ok(())
    }

    /// The label the classifier is trained against for a raw class label.
    pub fn effective_label(&self, label: usize) -> usize {
        if self.binary_mode {
            usize::from(label != 0)
        } else {
            label
        }
    }
}

/// Parameters of either architecture behind one dispatch surface.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum ModelParameters {
    Lstm(LstmParameters),
    Cnn(CnnParameters),
}

impl ModelParameters {
    pub fn kind(&self) -> ModelKind {
        match self {
            ModelParameters::Lstm(_) => ModelKind::Lstm,
            ModelParameters::Cnn(_) => ModelKind::Cnn,
        }
    }

    pub fn init(cfg: &ModelConfig) -> Self {
        match cfg.kind {
            ModelKind::Lstm => ModelParameters::Lstm(LstmParameters::init(
                cfg.input_dim,
                cfg.hidden_dim,
                cfg.class_count,
                cfg.seed,
            )),
            ModelKind::Cnn => ModelParameters::Cnn(CnnParameters::init(
                cfg.input_dim,
                cfg.cnn_kernel,
                cfg.hidden_dim,
                cfg.class_count,
                cfg.seed,
            )),
        }
    }

    pub fn class_count(&self) -> usize {
        match self {
            ModelParameters::Lstm(p) => p.class_count,
            ModelParameters::Cnn(p) => p.class_count,
        }
    }

    pub fn to_flat(&self) -> Vec<f64> {
        match self {
            ModelParameters::Lstm(p) => p.to_flat(),
            ModelParameters::Cnn(p) => p.to_flat(),
        }
    }

    pub fn assign_from_flat(&mut self, flat: &[f64]) {
        match self {
            ModelParameters::Lstm(p) => p.assign_from_flat(flat),
            ModelParameters::Cnn(p) => p.assign_from_flat(flat),
        }
    }

    pub fn forward_proba(&self, x: &Mat) -> Result<Vec<f64>> {
        match self {
            ModelParameters::Lstm(p) => Ok(lstm_forward_cached(p, x)?.probs),
            ModelParameters::Cnn(p) => Ok(cnn_forward_cached(p, x)?.probs),
        }
    }

    /// Gradient of the target-class logit with respect to the input matrix.
    pub fn input_logit_gradient(&self, x: &Mat, target_class: usize) -> Result<Mat> {
        let c = self.class_count();
        if target_class >= c {
            return Err(TshapError::invalid(format!(
                "target class {target_class} out of range (C = {c})"
            )));
        }
        let mut seed = vec![0.0; c];
        seed[target_class] = 1.0;
        match self {
            ModelParameters::Lstm(p) => {
                let cache = lstm_forward_cached(p, x)?;
                Ok(lstm_backward(p, x, &cache, &seed).1)
            }
            ModelParameters::Cnn(p) => {
                let cache = cnn_forward_cached(p, x)?;
                Ok(cnn_backward(p, x, &cache, &seed).1)
            }
        }
    }
}

/// Anything that maps a feature matrix to class probabilities. Implemented by
/// [`TrainedModel`] and by the lightweight surrogate models in tests.
pub trait Classifier {
    fn class_count(&self) -> usize;
    fn predict_proba_mat(&self, x: &Mat) -> Result<Vec<f64>>;

    fn predict_proba(&self, x: &FeatureSequence) -> Result<Vec<f64>> {
        self.predict_proba_mat(&x.data)
    }

    /// Predicted label (argmax of the probabilities, ties to the lowest
    /// class index) together with the probabilities.
    fn predict(&self, x: &FeatureSequence) -> Result<(usize, Vec<f64>)> {
        let probs = self.predict_proba(x)?;
        Ok((argmax(&probs), probs))
    }
}

/// Argmax with ties broken toward the lowest index.
pub fn argmax(values: &[f64]) -> usize {
    let mut best = 0;
    for (i, &v) in values.iter().enumerate().skip(1) {
        if v > values[best] {
            best = i;
        }
    }
    best
}

/// An immutable trained classifier with its configuration and history.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainedModel {
    pub config: ModelConfig,
    pub params: ModelParameters,
    pub history: Vec<EpochStats>,
}

impl TrainedModel {
    pub fn kind(&self) -> ModelKind {
        self.params.kind()
    }

    pub fn lstm(&self) -> Result<&LstmParameters> {
        match &self.params {
            ModelParameters::Lstm(p) => Ok(p),
            ModelParameters::Cnn(_) => Err(TshapError::WrongModelKind {
                expected: "lstm".into(),
                actual: "cnn".into(),
            }),
        }
    }

    pub fn cnn(&self) -> Result<&CnnParameters> {
        match &self.params {
            ModelParameters::Cnn(p) => Ok(p),
            ModelParameters::Lstm(_) => Err(TshapError::WrongModelKind {
                expected: "cnn".into(),
                actual: "lstm".into(),
            }),
        }
    }

    /// Accuracy over labelled sequences (labels mapped by `binary_mode`).
    pub fn accuracy(&self, sequences: &[&FeatureSequence]) -> Result<f64> {
        if sequences.is_empty() {
            return Ok(0.0);
        }
        let mut correct = 0usize;
        for seq in sequences {
            let (label, _) = self.predict(seq)?;
            if label == self.config.effective_label(seq.label) {
                correct += 1;
            }
        }
        Ok(correct as f64 / sequences.len() as f64)
    }
}

impl Classifier for TrainedModel {
    fn class_count(&self) -> usize {
        self.params.class_count()
    }

    fn predict_proba_mat(&self, x: &Mat) -> Result<Vec<f64>> {
        self.params.forward_proba(x)
    }
}
