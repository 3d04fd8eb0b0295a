//! Single-layer LSTM classifier with exact reverse-mode gradients.
//!
//! Gate layout inside the stacked 4h rows is `[input; forget; cell; output]`.
//! The dual-bias convention (separate input-path and recurrent-path bias
//! vectors) is used throughout, giving the parameter count
//! `4·(d·h + h² + 2h)`.

use serde::{Deserialize, Serialize};

use crate::error::{Result, TshapError};
use crate::linalg::{softmax, Mat};
use crate::rng::SplitMix64;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LstmParameters {
    pub input_dim: usize,
    pub hidden_dim: usize,
    pub class_count: usize,
    /// Input weights, 4h × d.
    pub w_x: Mat,
    /// Recurrent weights, 4h × h.
    pub w_h: Mat,
    /// Input-path bias, 4h.
    pub b_x: Vec<f64>,
    /// Recurrent-path bias, 4h.
    pub b_h: Vec<f64>,
    /// Dense classifier weights, C × h.
    pub dense_w: Mat,
    /// Dense classifier bias, C.
    pub dense_b: Vec<f64>,
}

impl LstmParameters {
    pub fn zeros(input_dim: usize, hidden_dim: usize, class_count: usize) -> Self {
        Self {
            input_dim,
            hidden_dim,
            class_count,
            w_x: Mat::zeros(4 * hidden_dim, input_dim),
            w_h: Mat::zeros(4 * hidden_dim, hidden_dim),
            b_x: vec![0.0; 4 * hidden_dim],
            b_h: vec![0.0; 4 * hidden_dim],
            dense_w: Mat::zeros(class_count, hidden_dim),
            dense_b: vec![0.0; class_count],
        }
    }

    /// Seeded uniform initialization in ±1/√fan_in per weight matrix;
    /// biases start at zero.
    pub fn init(input_dim: usize, hidden_dim: usize, class_count: usize, seed: u64) -> Self {
        let mut params = Self::zeros(input_dim, hidden_dim, class_count);
        let mut rng = SplitMix64::from_path(seed, &[10]);
        let mut fill = |m: &mut Mat, fan_in: usize| {
            let bound = 1.0 / (fan_in as f64).sqrt();
            for v in m.data_mut() {
                *v = rng.uniform(-bound, bound);
            }
        };
        fill(&mut params.w_x, input_dim);
        fill(&mut params.w_h, hidden_dim);
        fill(&mut params.dense_w, hidden_dim);
        params
    }

    pub fn parameter_count(&self) -> usize {
        let h = self.hidden_dim;
        let d = self.input_dim;
        4 * (d * h + h * h + 2 * h) + (h + 1) * self.class_count
    }

    /// Flattens all tensors row-major in the order
    /// `[w_x, w_h, b_x, b_h, dense_w, dense_b]`.
    pub fn to_flat(&self) -> Vec<f64> {
        let mut flat = Vec::with_capacity(self.parameter_count());
        flat.extend_from_slice(self.w_x.data());
        flat.extend_from_slice(self.w_h.data());
        flat.extend_from_slice(&self.b_x);
        flat.extend_from_slice(&self.b_h);
        flat.extend_from_slice(self.dense_w.data());
        flat.extend_from_slice(&self.dense_b);
        flat
    }

    pub fn assign_from_flat(&mut self, flat: &[f64]) {
        assert_eq!(flat.len(), self.parameter_count());
        let mut offset = 0;
        let mut take = |len: usize| {
            let slice = &flat[offset..offset + len];
            offset += len;
            slice
        };
        let n = self.w_x.data().len();
        self.w_x.data_mut().copy_from_slice(take(n));
        let n = self.w_h.data().len();
        self.w_h.data_mut().copy_from_slice(take(n));
        let n = self.b_x.len();
        self.b_x.copy_from_slice(take(n));
        let n = self.b_h.len();
        self.b_h.copy_from_slice(take(n));
        let n = self.dense_w.data().len();
        self.dense_w.data_mut().copy_from_slice(take(n));
        let n = self.dense_b.len();
        self.dense_b.copy_from_slice(take(n));
    }
}

/// Everything the backward pass needs from one forward evaluation.
#[derive(Debug, Clone)]
pub struct LstmCache {
    pub gate_i: Mat,
    pub gate_f: Mat,
    pub gate_g: Mat,
    pub gate_o: Mat,
    pub cells: Mat,
    pub tanh_c: Mat,
    pub hidden: Mat,
    pub logits: Vec<f64>,
    pub probs: Vec<f64>,
}

fn sigmoid(x: f64) -> f64 {
    1.0 / (1.0 + (-x).exp())
}

/// Runs the LSTM recurrence over `x` (T × d) from zero initial state and
/// classifies from the final hidden state.
pub fn lstm_forward_cached(params: &LstmParameters, x: &Mat) -> Result<LstmCache> {
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
    let h = params.hidden_dim;

    let mut gate_i = Mat::zeros(t_len, h);
    let mut gate_f = Mat::zeros(t_len, h);
    let mut gate_g = Mat::zeros(t_len, h);
    let mut gate_o = Mat::zeros(t_len, h);
    let mut cells = Mat::zeros(t_len, h);
    let mut tanh_c = Mat::zeros(t_len, h);
    let mut hidden = Mat::zeros(t_len, h);

    let mut h_prev = vec![0.0; h];
    let mut c_prev = vec![0.0; h];
    let mut z = vec![0.0; 4 * h];

    for t in 0..t_len {
        for (zi, (bx, bh)) in z.iter_mut().zip(params.b_x.iter().zip(&params.b_h)) {
            *zi = bx + bh;
        }
        params.w_x.matvec_add(x.row(t), &mut z);
        params.w_h.matvec_add(&h_prev, &mut z);

        for k in 0..h {
            let i = sigmoid(z[k]);
            let f = sigmoid(z[h + k]);
            let g = z[2 * h + k].tanh();
            let o = sigmoid(z[3 * h + k]);
            let c = f * c_prev[k] + i * g;
            let tc = c.tanh();
            gate_i.set(t, k, i);
            gate_f.set(t, k, f);
            gate_g.set(t, k, g);
            gate_o.set(t, k, o);
            cells.set(t, k, c);
            tanh_c.set(t, k, tc);
            hidden.set(t, k, o * tc);
        }
        h_prev.copy_from_slice(hidden.row(t));
        c_prev.copy_from_slice(cells.row(t));
        if !h_prev.iter().all(|v| v.is_finite()) {
            return Err(TshapError::non_finite("hidden_state"));
        }
    }

    let mut logits = params.dense_b.clone();
    params.dense_w.matvec_add(&h_prev, &mut logits);
    if !logits.iter().all(|v| v.is_finite()) {
        return Err(TshapError::non_finite("logits"));
    }
    let probs = softmax(&logits);

    Ok(LstmCache {
        gate_i,
        gate_f,
        gate_g,
        gate_o,
        cells,
        tanh_c,
        hidden,
        logits,
        probs,
    })
}

/// Public forward surface: per-step hidden states plus class probabilities.
pub fn lstm_forward(params: &LstmParameters, x: &Mat) -> Result<(Mat, Vec<f64>)> {
    let cache = lstm_forward_cached(params, x)?;
    Ok((cache.hidden, cache.probs))
}

/// Class probabilities after running only frames `start_t..T` from the given
/// hidden/cell state (the state after consuming frames `0..start_t`).
///
/// Executes the exact per-step operations of [`lstm_forward_cached`], so for
/// a matrix whose rows before `start_t` are unchanged the result is
/// bit-identical to a full forward pass. Used to share the prefix state
/// across the coalition evaluations of one frame's masking game.
pub fn lstm_forward_suffix(
    params: &LstmParameters,
    x: &Mat,
    start_t: usize,
    h_start: &[f64],
    c_start: &[f64],
) -> Result<Vec<f64>> {
    if x.cols() != params.input_dim {
        return Err(TshapError::invalid(format!(
            "input has {} columns, model expects {}",
            x.cols(),
            params.input_dim
        )));
    }
    let t_len = x.rows();
    if start_t > t_len {
        return Err(TshapError::invalid(format!(
            "suffix start {start_t} beyond sequence length {t_len}"
        )));
    }
    let h = params.hidden_dim;
    debug_assert_eq!(h_start.len(), h);
    debug_assert_eq!(c_start.len(), h);

    let mut h_prev = h_start.to_vec();
    let mut c_prev = c_start.to_vec();
    let mut z = vec![0.0; 4 * h];

    for t in start_t..t_len {
        for (zi, (bx, bh)) in z.iter_mut().zip(params.b_x.iter().zip(&params.b_h)) {
            *zi = bx + bh;
        }
        params.w_x.matvec_add(x.row(t), &mut z);
        params.w_h.matvec_add(&h_prev, &mut z);

        for k in 0..h {
            let i = sigmoid(z[k]);
            let f = sigmoid(z[h + k]);
            let g = z[2 * h + k].tanh();
            let o = sigmoid(z[3 * h + k]);
            let c = f * c_prev[k] + i * g;
            c_prev[k] = c;
            h_prev[k] = o * c.tanh();
        }
        if !h_prev.iter().all(|v| v.is_finite()) {
            return Err(TshapError::non_finite("hidden_state"));
        }
    }

    let mut logits = params.dense_b.clone();
    params.dense_w.matvec_add(&h_prev, &mut logits);
    if !logits.iter().all(|v| v.is_finite()) {
        return Err(TshapError::non_finite("logits"));
    }
    Ok(softmax(&logits))
}

/// Backpropagation through time.
///
/// `dlogits` seeds the gradient at the dense layer's output, so the same
/// routine serves both the cross-entropy gradient (`probs − one_hot`) and
/// raw logit gradients for saliency (`one_hot(target)`). Returns parameter
/// gradients and the gradient with respect to the input matrix.
pub fn lstm_backward(
    params: &LstmParameters,
    x: &Mat,
    cache: &LstmCache,
    dlogits: &[f64],
) -> (LstmParameters, Mat) {
    let t_len = x.rows();
    let h = params.hidden_dim;
    let mut grads = LstmParameters::zeros(params.input_dim, h, params.class_count);
    let mut dx = Mat::zeros(t_len, params.input_dim);

    let h_last = cache.hidden.row(t_len - 1);
    grads.dense_w.outer_add(dlogits, h_last);
    for (gb, dl) in grads.dense_b.iter_mut().zip(dlogits) {
        *gb += dl;
    }

    let mut dh = vec![0.0; h];
    params.dense_w.matvec_transpose_add(dlogits, &mut dh);
    let mut dc = vec![0.0; h];
    let mut dz = vec![0.0; 4 * h];

    for t in (0..t_len).rev() {
        for k in 0..h {
            let i = cache.gate_i.get(t, k);
            let f = cache.gate_f.get(t, k);
            let g = cache.gate_g.get(t, k);
            let o = cache.gate_o.get(t, k);
            let tc = cache.tanh_c.get(t, k);
            let c_prev = if t > 0 { cache.cells.get(t - 1, k) } else { 0.0 };

            let do_ = dh[k] * tc;
            let dc_total = dc[k] + dh[k] * o * (1.0 - tc * tc);
            let di = dc_total * g;
            let dg = dc_total * i;
            let df = dc_total * c_prev;

            dz[k] = di * i * (1.0 - i);
            dz[h + k] = df * f * (1.0 - f);
            dz[2 * h + k] = dg * (1.0 - g * g);
            dz[3 * h + k] = do_ * o * (1.0 - o);
            dc[k] = dc_total * f;
        }

        grads.w_x.outer_add(&dz, x.row(t));
        if t > 0 {
            grads.w_h.outer_add(&dz, cache.hidden.row(t - 1));
        }
        for ((bx, bh), d) in grads.b_x.iter_mut().zip(&mut grads.b_h).zip(&dz) {
            *bx += d;
            *bh += d;
        }

        params.w_x.matvec_transpose_add(&dz, dx.row_mut(t));
        dh.iter_mut().for_each(|v| *v = 0.0);
        if t > 0 {
            params.w_h.matvec_transpose_add(&dz, &mut dh);
        }
    }

    (grads, dx)
}
