//! Cross-entropy loss, batched gradients, and the Adam training loop.

use serde::{Deserialize, Serialize};

use super::{
    cnn_backward, cnn_forward_cached, lstm_backward, lstm_forward_cached, CnnParameters,
    LstmParameters, ModelConfig, ModelParameters, TrainedModel,
};
use crate::data::FeatureSequence;
use crate::error::{Result, TshapError};
use crate::linalg::{mean, Mat};
use crate::rng::SplitMix64;

/// One row of the training history.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpochStats {
    pub epoch: usize,
    pub loss: f64,
    pub accuracy: f64,
}

impl LstmParameters {
    fn accumulate(&mut self, other: &LstmParameters) {
        self.w_x.add_scaled(&other.w_x, 1.0);
        self.w_h.add_scaled(&other.w_h, 1.0);
        for (a, b) in self.b_x.iter_mut().zip(&other.b_x) {
            *a += b;
        }
        for (a, b) in self.b_h.iter_mut().zip(&other.b_h) {
            *a += b;
        }
        self.dense_w.add_scaled(&other.dense_w, 1.0);
        for (a, b) in self.dense_b.iter_mut().zip(&other.dense_b) {
            *a += b;
        }
    }
}

impl CnnParameters {
    fn accumulate(&mut self, other: &CnnParameters) {
        self.conv_w.add_scaled(&other.conv_w, 1.0);
        for (a, b) in self.conv_b.iter_mut().zip(&other.conv_b) {
            *a += b;
        }
        self.dense_w.add_scaled(&other.dense_w, 1.0);
        for (a, b) in self.dense_b.iter_mut().zip(&other.dense_b) {
            *a += b;
        }
    }
}

/// Mean cross-entropy over a batch without the backward pass.
pub fn batch_loss(params: &ModelParameters, batch: &[(&Mat, usize)]) -> Result<f64> {
    if batch.is_empty() {
        return Err(TshapError::invalid("batch must be non-empty"));
    }
    let mut total = 0.0;
    for &(x, label) in batch {
        let probs = params.forward_proba(x)?;
        if label >= probs.len() {
            return Err(TshapError::invalid(format!(
                "label {label} out of range (C = {})",
                probs.len()
            )));
        }
        total += -probs[label].ln();
    }
    let loss = total / batch.len() as f64;
    if !loss.is_finite() {
        return Err(TshapError::non_finite("loss"));
    }
    Ok(loss)
}

/// Mean cross-entropy and exact parameter gradients over a batch.
///
/// The per-sample logit gradient is `softmax − one_hot`, scaled by `1/B` for
/// the batch mean; everything upstream comes from backpropagation through
/// time (LSTM) or through the convolution (CNN).
pub fn loss_and_grad(
    params: &ModelParameters,
    batch: &[(&Mat, usize)],
) -> Result<(f64, ModelParameters)> {
    if batch.is_empty() {
        return Err(TshapError::invalid("batch must be non-empty"));
    }
    let scale = 1.0 / batch.len() as f64;
    let mut total = 0.0;

    match params {
        ModelParameters::Lstm(p) => {
            let mut grads = LstmParameters::zeros(p.input_dim, p.hidden_dim, p.class_count);
            for &(x, label) in batch {
                let cache = lstm_forward_cached(p, x)?;
                if label >= cache.probs.len() {
                    return Err(TshapError::invalid(format!(
                        "label {label} out of range (C = {})",
                        cache.probs.len()
                    )));
                }
                total += -cache.probs[label].ln();
                let mut dlogits: Vec<f64> = cache.probs.iter().map(|&q| q * scale).collect();
                dlogits[label] -= scale;
                let (sample_grads, _) = lstm_backward(p, x, &cache, &dlogits);
                grads.accumulate(&sample_grads);
            }
            let loss = total * scale;
            if !loss.is_finite() {
                return Err(TshapError::non_finite("loss"));
            }
            Ok((loss, ModelParameters::Lstm(grads)))
        }
        ModelParameters::Cnn(p) => {
            let mut grads =
                CnnParameters::zeros(p.input_dim, p.kernel, p.channels, p.class_count);
            for &(x, label) in batch {
                let cache = cnn_forward_cached(p, x)?;
                if label >= cache.probs.len() {
                    return Err(TshapError::invalid(format!(
                        "label {label} out of range (C = {})",
                        cache.probs.len()
                    )));
                }
                total += -cache.probs[label].ln();
                let mut dlogits: Vec<f64> = cache.probs.iter().map(|&q| q * scale).collect();
                dlogits[label] -= scale;
                let (sample_grads, _) = cnn_backward(p, x, &cache, &dlogits);
                grads.accumulate(&sample_grads);
            }
            let loss = total * scale;
            if !loss.is_finite() {
                return Err(TshapError::non_finite("loss"));
            }
            Ok((loss, ModelParameters::Cnn(grads)))
        }
    }
}

struct Adam {
    learning_rate: f64,
    beta1: f64,
    beta2: f64,
    epsilon: f64,
    m: Vec<f64>,
    v: Vec<f64>,
    step_count: u64,
}

impl Adam {
    fn new(n: usize, learning_rate: f64) -> Self {
        Self {
            learning_rate,
            beta1: 0.9,
            beta2: 0.999,
            epsilon: 1e-8,
            m: vec![0.0; n],
            v: vec![0.0; n],
            step_count: 0,
        }
    }

    fn step(&mut self, theta: &mut [f64], grad: &[f64]) {
        self.step_count += 1;
        let bc1 = 1.0 - self.beta1.powi(self.step_count as i32);
        let bc2 = 1.0 - self.beta2.powi(self.step_count as i32);
        for i in 0..theta.len() {
            self.m[i] = self.beta1 * self.m[i] + (1.0 - self.beta1) * grad[i];
            self.v[i] = self.beta2 * self.v[i] + (1.0 - self.beta2) * grad[i] * grad[i];
            let m_hat = self.m[i] / bc1;
            let v_hat = self.v[i] / bc2;
            theta[i] -= self.learning_rate * m_hat / (v_hat.sqrt() + self.epsilon);
        }
    }
}

/// Rescales `grad` in place so its global L2 norm is at most `max_norm`.
fn clip_global_norm(grad: &mut [f64], max_norm: f64) {
    let norm = grad.iter().map(|g| g * g).sum::<f64>().sqrt();
    if norm > max_norm {
        let scale = max_norm / norm;
        for g in grad.iter_mut() {
            *g *= scale;
        }
    }
}

/// Trains a model with Adam (β₁ = 0.9, β₂ = 0.999, ε = 1e-8) on mean
/// cross-entropy, with gradient clipping at global norm 5.
///
/// Deterministic given `cfg.seed`: initialization and the per-epoch shuffle
/// order derive from it, so equal seeds give bit-identical parameter
/// trajectories.
pub fn train(dataset: &[FeatureSequence], cfg: &ModelConfig) -> Result<TrainedModel> {
    cfg.validate()?;
    if dataset.is_empty() {
        return Err(TshapError::invalid("training dataset must be non-empty"));
    }
    for (i, seq) in dataset.iter().enumerate() {
        let label = cfg.effective_label(seq.label);
        if label >= cfg.class_count {
            return Err(TshapError::invalid(format!(
                "sequence {i}: label {label} out of range (C = {})",
                cfg.class_count
            )));
        }
        if seq.data.cols() != cfg.input_dim {
            return Err(TshapError::invalid(format!(
                "sequence {i}: {} feature columns, expected {}",
                seq.data.cols(),
                cfg.input_dim
            )));
        }
    }

    let mut params = ModelParameters::init(cfg);
    let mut theta = params.to_flat();
    let mut adam = Adam::new(theta.len(), cfg.learning_rate);
    let mut history = Vec::with_capacity(cfg.epochs);

    for epoch in 0..cfg.epochs {
        let mut order = SplitMix64::from_path(cfg.seed, &[20, epoch as u64]).permutation(dataset.len());
        let mut batch_losses = Vec::new();

        for chunk in order.chunks(cfg.batch_size) {
            let batch: Vec<(&Mat, usize)> = chunk
                .iter()
                .map(|&i| (&dataset[i].data, cfg.effective_label(dataset[i].label)))
                .collect();
            let (loss, grads) = match loss_and_grad(&params, &batch) {
                Ok(result) => result,
                Err(TshapError::NumericOverflow { .. }) => {
                    return Err(TshapError::TrainingFailure { epoch });
                }
                Err(other) => return Err(other),
            };
            if !loss.is_finite() {
                return Err(TshapError::TrainingFailure { epoch });
            }
            batch_losses.push(loss);

            let mut flat_grads = grads.to_flat();
            clip_global_norm(&mut flat_grads, 5.0);
            adam.step(&mut theta, &flat_grads);
            params.assign_from_flat(&theta);
        }
        order.clear();

        let model_view = TrainedModel {
            config: cfg.clone(),
            params: params.clone(),
            history: vec![],
        };
        let refs: Vec<&FeatureSequence> = dataset.iter().collect();
        let accuracy = model_view.accuracy(&refs)?;
        history.push(EpochStats {
            epoch,
            loss: mean(&batch_losses),
            accuracy,
        });
    }

    Ok(TrainedModel {
        config: cfg.clone(),
        params,
        history,
    })
}
