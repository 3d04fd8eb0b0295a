//! 1D temporal convolution baseline: one same-padded conv layer with ReLU,
//! global average pooling over time, and a dense softmax classifier. The
//! post-ReLU feature maps are kept around for Grad-CAM.

use serde::{Deserialize, Serialize};

use crate::error::{Result, TshapError};
use crate::linalg::{softmax, Mat};
use crate::rng::SplitMix64;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CnnParameters {
    pub input_dim: usize,
    /// Odd temporal kernel width.
    pub kernel: usize,
    pub channels: usize,
    pub class_count: usize,
    /// Convolution weights, channels × (kernel · input_dim); row f holds the
    /// tap for offset u and feature j at index `u · input_dim + j`.
    pub conv_w: Mat,
    pub conv_b: Vec<f64>,
    /// Dense classifier weights, C × channels.
    pub dense_w: Mat,
    pub dense_b: Vec<f64>,
}

impl CnnParameters {
    pub fn zeros(input_dim: usize, kernel: usize, channels: usize, class_count: usize) -> Self {
        assert!(kernel % 2 == 1, "kernel width must be odd");
        assert!(channels >= 1);
        Self {
            input_dim,
            kernel,
            channels,
            class_count,
            conv_w: Mat::zeros(channels, kernel * input_dim),
            conv_b: vec![0.0; channels],
            dense_w: Mat::zeros(class_count, channels),
            dense_b: vec![0.0; class_count],
        }
    }

    pub fn init(
        input_dim: usize,
        kernel: usize,
        channels: usize,
        class_count: usize,
        seed: u64,
    ) -> Self {
        let mut params = Self::zeros(input_dim, kernel, channels, class_count);
        let mut rng = SplitMix64::from_path(seed, &[11]);
        let bound = 1.0 / ((kernel * input_dim) as f64).sqrt();
        for v in params.conv_w.data_mut() {
            *v = rng.uniform(-bound, bound);
        }
        let bound = 1.0 / (channels as f64).sqrt();
        for v in params.dense_w.data_mut() {
            *v = rng.uniform(-bound, bound);
        }
        params
    }

    pub fn parameter_count(&self) -> usize {
        self.channels * (self.kernel * self.input_dim + 1)
            + self.class_count * (self.channels + 1)
    }

    pub fn to_flat(&self) -> Vec<f64> {
        let mut flat = Vec::with_capacity(self.parameter_count());
        flat.extend_from_slice(self.conv_w.data());
        flat.extend_from_slice(&self.conv_b);
        flat.extend_from_slice(self.dense_w.data());
        flat.extend_from_slice(&self.dense_b);
        flat
    }

    pub fn assign_from_flat(&mut self, flat: &[f64]) {
        assert_eq!(flat.len(), self.parameter_count());
        let mut offset = 0;
        let n = self.conv_w.data().len();
        self.conv_w.data_mut().copy_from_slice(&flat[..n]);
        offset += n;
        self.conv_b
            .copy_from_slice(&flat[offset..offset + self.channels]);
        offset += self.channels;
        let n = self.dense_w.data().len();
        self.dense_w.data_mut().copy_from_slice(&flat[offset..offset + n]);
        offset += n;
        self.dense_b.copy_from_slice(&flat[offset..]);
    }
}

#[derive(Debug, Clone)]
pub struct CnnCache {
    /// Pre-activation values (for the ReLU mask in the backward pass).
    pub pre_activation: Mat,
    /// Post-ReLU feature maps, T × channels.
    pub feature_maps: Mat,
    pub pooled: Vec<f64>,
    pub logits: Vec<f64>,
    pub probs: Vec<f64>,
}

pub fn cnn_forward_cached(params: &CnnParameters, x: &Mat) -> Result<CnnCache> {
    if x.cols() != params.input_dim {
        return Err(TshapError::invalid(format!(
            "input has {} columns, model expects {}",
            x.cols(),
            params.input_dim
        )));
    }
    if x.rows() == 0 {
        return Err(TshapError::invalid("input sequence is empty"));
    }
    let t_len = x.rows();
    let d = params.input_dim;
    let half = params.kernel / 2;

    let mut pre_activation = Mat::zeros(t_len, params.channels);
    let mut feature_maps = Mat::zeros(t_len, params.channels);
    let mut pooled = vec![0.0; params.channels];

    for t in 0..t_len {
        for f in 0..params.channels {
            let weights = params.conv_w.row(f);
            let mut acc = params.conv_b[f];
            for u in 0..params.kernel {
                let src = t as isize + u as isize - half as isize;
                if src < 0 || src >= t_len as isize {
                    continue; // zero padding
                }
                let row = x.row(src as usize);
                let taps = &weights[u * d..(u + 1) * d];
                for (w, v) in taps.iter().zip(row) {
                    acc += w * v;
                }
            }
            pre_activation.set(t, f, acc);
            let activated = acc.max(0.0);
            feature_maps.set(t, f, activated);
            pooled[f] += activated;
        }
    }
    for p in &mut pooled {
        *p /= t_len as f64;
    }
    if !feature_maps.is_finite() {
        return Err(TshapError::non_finite("feature_maps"));
    }

    let mut logits = params.dense_b.clone();
    params.dense_w.matvec_add(&pooled, &mut logits);
    if !logits.iter().all(|v| v.is_finite()) {
        return Err(TshapError::non_finite("logits"));
    }
    let probs = softmax(&logits);

    Ok(CnnCache {
        pre_activation,
        feature_maps,
        pooled,
        logits,
        probs,
    })
}

/// Public forward surface: feature maps plus class probabilities.
pub fn cnn_forward(params: &CnnParameters, x: &Mat) -> Result<(Mat, Vec<f64>)> {
    let cache = cnn_forward_cached(params, x)?;
    Ok((cache.feature_maps, cache.probs))
}

/// Reverse pass seeded at the logits; returns parameter gradients and the
/// input gradient.
pub fn cnn_backward(
    params: &CnnParameters,
    x: &Mat,
    cache: &CnnCache,
    dlogits: &[f64],
) -> (CnnParameters, Mat) {
    let t_len = x.rows();
    let d = params.input_dim;
    let half = params.kernel / 2;
    let mut grads = CnnParameters::zeros(d, params.kernel, params.channels, params.class_count);
    let mut dx = Mat::zeros(t_len, d);

    grads.dense_w.outer_add(dlogits, &cache.pooled);
    for (gb, dl) in grads.dense_b.iter_mut().zip(dlogits) {
        *gb += dl;
    }
    let mut dpooled = vec![0.0; params.channels];
    params.dense_w.matvec_transpose_add(dlogits, &mut dpooled);

    for t in 0..t_len {
        for f in 0..params.channels {
            if cache.pre_activation.get(t, f) <= 0.0 {
                continue;
            }
            // d(feature)/d(pool mean) then through the ReLU gate.
            let da = dpooled[f] / t_len as f64;
            grads.conv_b[f] += da;
            let weight_row = params.conv_w.row(f);
            let grad_row = grads.conv_w.row_mut(f);
            for u in 0..params.kernel {
                let src = t as isize + u as isize - half as isize;
                if src < 0 || src >= t_len as isize {
                    continue;
                }
                let src = src as usize;
                let x_row = x.row(src);
                let dx_row = dx.row_mut(src);
                for j in 0..d {
                    grad_row[u * d + j] += da * x_row[j];
                    dx_row[j] += da * weight_row[u * d + j];
                }
            }
        }
    }

    (grads, dx)
}
