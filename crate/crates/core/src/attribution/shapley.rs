//! Shapley value estimation for per-frame masking games.
//!
//! A frame game has one player per feature group of frame `t`; the value of
//! a coalition S is the model's target-class probability with frame `t`'s
//! out-of-coalition features zeroed and every other frame left at its
//! observed values. Exact mode enumerates all 2^G coalitions with a memo
//! table; sampled mode averages marginal contributions over seeded random
//! player permutations and is an unbiased estimator of the exact value.

use std::collections::HashMap;

use super::{AttributionMap, Grouping};
use crate::data::FeatureSequence;
use crate::error::{Result, TshapError};
use crate::linalg::Mat;
use crate::model::Classifier;
use crate::rng::SplitMix64;

/// Coalition bitmask; bit i set means player i is present.
pub type Coalition = u128;

/// Exact enumeration is restricted to games of at most this many players.
pub const EXACT_PLAYER_LIMIT: usize = 20;

fn binomial(n: usize, k: usize) -> f64 {
    let mut acc: u64 = 1;
    for i in 0..k.min(n - k) {
        acc = acc * (n - i) as u64 / (i + 1) as u64;
    }
    acc as f64
}

/// Exact Shapley values of an n-player game by coalition enumeration.
///
/// The value function is evaluated exactly once per coalition (2^n calls).
/// Marginal contributions are grouped by coalition size before averaging,
/// which keeps additive games exact: when every marginal equals c_i, the
/// per-size means and their final average reproduce c_i bit for bit.
pub fn exact_shapley_game(
    n_players: usize,
    value: &mut dyn FnMut(Coalition) -> Result<f64>,
) -> Result<Vec<f64>> {
    if n_players == 0 {
        return Ok(Vec::new());
    }
    if n_players > EXACT_PLAYER_LIMIT {
        return Err(TshapError::invalid(format!(
            "{n_players} players exceeds the exact enumeration bound of \
             {EXACT_PLAYER_LIMIT}; use sampled_shapley instead"
        )));
    }

    let table_size = 1usize << n_players;
    let mut table = Vec::with_capacity(table_size);
    for mask in 0..table_size {
        table.push(value(mask as Coalition)?);
    }

    let mut phi = vec![0.0; n_players];
    let mut by_size = vec![0.0; n_players];
    for (player, phi_i) in phi.iter_mut().enumerate() {
        let bit = 1usize << player;
        by_size.iter_mut().for_each(|v| *v = 0.0);
        for mask in 0..table_size {
            if mask & bit != 0 {
                continue;
            }
            let size = mask.count_ones() as usize;
            by_size[size] += table[mask | bit] - table[mask];
        }
        let mut total = 0.0;
        for (size, sum) in by_size.iter().enumerate() {
            total += sum / binomial(n_players - 1, size);
        }
        *phi_i = total / n_players as f64;
    }
    Ok(phi)
}

/// Monte Carlo Shapley estimate over `n_permutations` seeded permutations.
///
/// Each permutation inserts the players in order and credits every player
/// with its marginal contribution; coalition values are memoized within the
/// game, so the estimator is unchanged while repeated evaluations are free.
pub fn sampled_shapley_game(
    n_players: usize,
    n_permutations: usize,
    seed: u64,
    value: &mut dyn FnMut(Coalition) -> Result<f64>,
) -> Result<Vec<f64>> {
    if n_permutations < 1 {
        return Err(TshapError::invalid("n_permutations must be >= 1"));
    }
    if n_players == 0 {
        return Ok(Vec::new());
    }
    let mut memo: HashMap<Coalition, f64> = HashMap::new();
    let mut eval = |mask: Coalition,
                    value: &mut dyn FnMut(Coalition) -> Result<f64>|
     -> Result<f64> {
        if let Some(&v) = memo.get(&mask) {
            return Ok(v);
        }
        let v = value(mask)?;
        memo.insert(mask, v);
        Ok(v)
    };

    let mut rng = SplitMix64::new(seed);
    let mut acc = vec![0.0; n_players];
    for _ in 0..n_permutations {
        let order = rng.permutation(n_players);
        let mut coalition: Coalition = 0;
        let mut prev = eval(coalition, value)?;
        for &player in &order {
            coalition |= 1 << player;
            let cur = eval(coalition, value)?;
            acc[player] += cur - prev;
            prev = cur;
        }
    }
    for a in &mut acc {
        *a /= n_permutations as f64;
    }
    Ok(acc)
}

/// Builds the masking value function for frame `t` of `x`.
///
/// Evaluations mutate a scratch copy of the sequence: frame `t` is rewritten
/// per coalition, all other frames stay at their observed values.
fn with_frame_game<M: Classifier + ?Sized, R>(
    model: &M,
    x: &FeatureSequence,
    t: usize,
    grouping: &Grouping,
    target_class: usize,
    run: impl FnOnce(&mut dyn FnMut(Coalition) -> Result<f64>) -> Result<R>,
) -> Result<R> {
    if t >= x.len() {
        return Err(TshapError::invalid(format!(
            "frame {t} out of range (T = {})",
            x.len()
        )));
    }
    if target_class >= model.class_count() {
        return Err(TshapError::invalid(format!(
            "target class {target_class} out of range (C = {})",
            model.class_count()
        )));
    }
    let mut scratch: Mat = x.data.clone();
    let observed_row: Vec<f64> = x.data.row(t).to_vec();
    let feature_to_group = &grouping.feature_to_group;

    let mut value_fn = |coalition: Coalition| -> Result<f64> {
        {
            let row = scratch.row_mut(t);
            for (feature, &group) in feature_to_group.iter().enumerate() {
                row[feature] = if coalition & (1 << group) != 0 {
                    observed_row[feature]
                } else {
                    0.0
                };
            }
        }
        let probs = model.predict_proba_mat(&scratch)?;
        Ok(probs[target_class])
    };
    run(&mut value_fn)
}

/// Exact per-frame Shapley attribution for every player of frame `t`.
pub fn exact_shapley_frame<M: Classifier + ?Sized>(
    model: &M,
    x: &FeatureSequence,
    t: usize,
    grouping: &Grouping,
    target_class: usize,
) -> Result<Vec<f64>> {
    with_frame_game(model, x, t, grouping, target_class, |value| {
        exact_shapley_game(grouping.n_players, value)
    })
}

/// Sampled per-frame Shapley values assembled over all frames.
///
/// Frame `t` uses the sub-seed `derive(seed, [frame_stream, t])`, so a
/// parallel schedule over frames would agree bit-for-bit with this serial
/// loop.
pub fn sampled_shapley<M: Classifier + ?Sized>(
    model: &M,
    x: &FeatureSequence,
    grouping: &Grouping,
    n_permutations: usize,
    seed: u64,
    target_class: usize,
) -> Result<AttributionMap> {
    if n_permutations < 1 {
        return Err(TshapError::invalid("n_permutations must be >= 1"));
    }
    let mut values = Mat::zeros(x.len(), grouping.n_players);
    for t in 0..x.len() {
        let frame_seed = SplitMix64::derive(seed, &[30, t as u64]);
        let phi = with_frame_game(model, x, t, grouping, target_class, |value| {
            sampled_shapley_game(grouping.n_players, n_permutations, frame_seed, value)
        })?;
        values.row_mut(t).copy_from_slice(&phi);
    }
    AttributionMap::from_grouping(
        values,
        grouping,
        target_class,
        format!("shap[sampled;n={n_permutations}]"),
    )
}

/// How to estimate the per-frame games of a full map.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ShapMode {
    Exact,
    Sampled { n_permutations: usize, seed: u64 },
}

/// Stacks per-frame Shapley vectors for t = 1..T into a T×G map.
pub fn shapley_full<M: Classifier + ?Sized>(
    model: &M,
    x: &FeatureSequence,
    grouping: &Grouping,
    mode: ShapMode,
    target_class: usize,
) -> Result<AttributionMap> {
    match mode {
        ShapMode::Sampled {
            n_permutations,
            seed,
        } => sampled_shapley(model, x, grouping, n_permutations, seed, target_class),
        ShapMode::Exact => {
            let mut values = Mat::zeros(x.len(), grouping.n_players);
            for t in 0..x.len() {
                let phi = exact_shapley_frame(model, x, t, grouping, target_class)?;
                values.row_mut(t).copy_from_slice(&phi);
            }
            AttributionMap::from_grouping(values, grouping, target_class, "shap[exact]")
        }
    }
}

/// Like [`with_frame_game`] but sharing the LSTM prefix state: frames before
/// `t` never change within one frame's game, so every coalition evaluation
/// re-runs only the suffix. Bit-identical to the generic path.
fn with_lstm_frame_game<R>(
    params: &crate::model::LstmParameters,
    cache: &crate::model::LstmCache,
    x: &FeatureSequence,
    t: usize,
    grouping: &Grouping,
    target_class: usize,
    run: impl FnOnce(&mut dyn FnMut(Coalition) -> Result<f64>) -> Result<R>,
) -> Result<R> {
    if t >= x.len() {
        return Err(TshapError::invalid(format!(
            "frame {t} out of range (T = {})",
            x.len()
        )));
    }
    if target_class >= params.class_count {
        return Err(TshapError::invalid(format!(
            "target class {target_class} out of range (C = {})",
            params.class_count
        )));
    }
    let zeros;
    let (h_start, c_start): (&[f64], &[f64]) = if t == 0 {
        zeros = vec![0.0; params.hidden_dim];
        (&zeros, &zeros)
    } else {
        (cache.hidden.row(t - 1), cache.cells.row(t - 1))
    };

    let mut scratch: Mat = x.data.clone();
    let observed_row: Vec<f64> = x.data.row(t).to_vec();
    let feature_to_group = &grouping.feature_to_group;

    let mut value_fn = |coalition: Coalition| -> Result<f64> {
        {
            let row = scratch.row_mut(t);
            for (feature, &group) in feature_to_group.iter().enumerate() {
                row[feature] = if coalition & (1 << group) != 0 {
                    observed_row[feature]
                } else {
                    0.0
                };
            }
        }
        let probs =
            crate::model::lstm_forward_suffix(params, &scratch, t, h_start, c_start)?;
        Ok(probs[target_class])
    };
    run(&mut value_fn)
}

/// [`shapley_full`] with the LSTM suffix optimization; CNN models fall back
/// to the generic path. Results are bit-identical either way.
pub fn shapley_full_fast(
    model: &crate::model::TrainedModel,
    x: &FeatureSequence,
    grouping: &Grouping,
    mode: ShapMode,
    target_class: usize,
) -> Result<AttributionMap> {
    let params = match &model.params {
        crate::model::ModelParameters::Lstm(p) => p,
        crate::model::ModelParameters::Cnn(_) => {
            return shapley_full(model, x, grouping, mode, target_class)
        }
    };
    let cache = crate::model::lstm_forward_cached(params, &x.data)?;
    let mut values = Mat::zeros(x.len(), grouping.n_players);
    let method = match mode {
        ShapMode::Exact => "shap[exact]".to_string(),
        ShapMode::Sampled { n_permutations, .. } => {
            format!("shap[sampled;n={n_permutations}]")
        }
    };
    for t in 0..x.len() {
        let phi = match mode {
            ShapMode::Exact => {
                with_lstm_frame_game(params, &cache, x, t, grouping, target_class, |value| {
                    exact_shapley_game(grouping.n_players, value)
                })?
            }
            ShapMode::Sampled {
                n_permutations,
                seed,
            } => {
                let frame_seed = SplitMix64::derive(seed, &[30, t as u64]);
                with_lstm_frame_game(params, &cache, x, t, grouping, target_class, |value| {
                    sampled_shapley_game(grouping.n_players, n_permutations, frame_seed, value)
                })?
            }
        };
        values.row_mut(t).copy_from_slice(&phi);
    }
    AttributionMap::from_grouping(values, grouping, target_class, method)
}
