//! Grad-CAM temporal saliency over the CNN baseline's feature maps.

use super::{AttributionMap, Grouping};
use crate::data::FeatureSequence;
use crate::error::Result;
use crate::linalg::Mat;
use crate::model::{cnn_forward_cached, TrainedModel};

/// Temporal Grad-CAM saliency: channel weights are the time-averaged
/// gradients of the target logit with respect to the feature maps, the
/// per-step saliency is the ReLU of the weighted channel sum, normalized to
/// [0, 1] by its maximum when positive.
///
/// With global average pooling the per-step logit gradient is
/// `dense_w[target][k] / T`, uniform over t.
pub fn grad_cam(
    model: &TrainedModel,
    x: &FeatureSequence,
    target_class: usize,
) -> Result<Vec<f64>> {
    let params = model.cnn()?;
    if target_class >= params.class_count {
        return Err(crate::error::TshapError::invalid(format!(
            "target class {target_class} out of range (C = {})",
            params.class_count
        )));
    }
    let cache = cnn_forward_cached(params, &x.data)?;
    let t_len = x.len();

    let alphas: Vec<f64> = (0..params.channels)
        .map(|k| params.dense_w.get(target_class, k) / t_len as f64)
        .collect();

    let mut saliency: Vec<f64> = (0..t_len)
        .map(|t| {
            let weighted: f64 = alphas
                .iter()
                .enumerate()
                .map(|(k, a)| a * cache.feature_maps.get(t, k))
                .sum();
            weighted.max(0.0)
        })
        .collect();

    let max = saliency.iter().cloned().fold(0.0_f64, f64::max);
    if max > 0.0 {
        for s in &mut saliency {
            *s /= max;
        }
    }
    Ok(saliency)
}

/// Broadcasts the temporal saliency uniformly across all players of
/// `grouping`, for shape-compatible comparison with the other methods.
pub fn grad_cam_map(
    model: &TrainedModel,
    x: &FeatureSequence,
    grouping: &Grouping,
    target_class: usize,
) -> Result<AttributionMap> {
    let saliency = grad_cam(model, x, target_class)?;
    let values = Mat::from_fn(x.len(), grouping.n_players, |t, _| saliency[t]);
    AttributionMap::from_grouping(values, grouping, target_class, "gradcam")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::FEATURE_DIM;
    use crate::model::{CnnParameters, ModelConfig, ModelKind, ModelParameters};

    fn cnn_model(params: CnnParameters) -> TrainedModel {
        TrainedModel {
            config: ModelConfig {
                kind: ModelKind::Cnn,
                input_dim: params.input_dim,
                hidden_dim: params.channels,
                class_count: params.class_count,
                cnn_kernel: params.kernel,
                ..ModelConfig::default()
            },
            params: ModelParameters::Cnn(params),
            history: vec![],
        }
    }

    #[test]
    fn rejects_lstm_models() {
        let cfg = ModelConfig {
            hidden_dim: 3,
            ..ModelConfig::default()
        };
        let lstm = TrainedModel {
            params: ModelParameters::init(&cfg),
            config: cfg,
            history: vec![],
        };
        let x = FeatureSequence::new(Mat::zeros(4, FEATURE_DIM), 0, 0).unwrap();
        assert!(matches!(
            grad_cam(&lstm, &x, 0),
            Err(crate::error::TshapError::WrongModelKind { .. })
        ));
    }

    #[test]
    fn constant_maps_give_constant_saliency() {
        // Identity-ish conv on a constant input yields time-constant maps.
        let mut params = CnnParameters::zeros(FEATURE_DIM, 1, 2, 2);
        params.conv_b = vec![1.0, 2.0];
        params.dense_w.set(0, 0, 1.0);
        params.dense_w.set(0, 1, 0.5);
        let model = cnn_model(params);
        let x = FeatureSequence::new(Mat::zeros(6, FEATURE_DIM), 0, 0).unwrap();
        let saliency = grad_cam(&model, &x, 0).unwrap();
        for s in &saliency {
            assert!((s - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn negative_weighted_sum_is_rectified_to_zero() {
        let mut params = CnnParameters::zeros(FEATURE_DIM, 1, 1, 2);
        params.conv_b = vec![1.0];
        params.dense_w.set(0, 0, -1.0); // negative channel weight
        let model = cnn_model(params);
        let x = FeatureSequence::new(Mat::zeros(4, FEATURE_DIM), 0, 0).unwrap();
        let saliency = grad_cam(&model, &x, 0).unwrap();
        assert!(saliency.iter().all(|&s| s == 0.0));
    }

    #[test]
    fn single_channel_hand_case_normalizes_by_max() {
        // Width-1 kernel reading feature 0 with x[t][0] = t+1 gives the
        // feature map [1, 2, 3]; with a unit channel weight the normalized
        // saliency is [1/3, 2/3, 1].
        let mut params = CnnParameters::zeros(FEATURE_DIM, 1, 1, 2);
        params.conv_w.set(0, 0, 1.0);
        params.dense_w.set(0, 0, 1.0);
        let model = cnn_model(params);
        let x = FeatureSequence::new(
            Mat::from_fn(3, FEATURE_DIM, |t, c| if c == 0 { (t + 1) as f64 } else { 0.0 }),
            0,
            0,
        )
        .unwrap();
        let cache = cnn_forward_cached(model.cnn().unwrap(), &x.data).unwrap();
        assert_eq!(cache.feature_maps.data(), &[1.0, 2.0, 3.0]);

        let saliency = grad_cam(&model, &x, 0).unwrap();
        for (value, expected) in saliency.iter().zip([1.0 / 3.0, 2.0 / 3.0, 1.0]) {
            assert!((value - expected).abs() < 1e-12, "{value} vs {expected}");
        }
    }
}
