//! Cross-module integration: generated data through training, attribution,
//! smoothing, and evaluation on one small but non-trivial instance.

use tshap_core::attribution::{
    exact_shapley_frame, grad_cam_map, gradient_saliency, mask_features, shapley_full, Grouping,
    MaskSpec, ShapMode,
};
use tshap_core::data::{
    generate_dataset, kfold_split, preprocess, FeatureSequence, GeneratorConfig,
};
use tshap_core::linalg::Mat;
use tshap_core::metrics::temporal_variance;
use tshap_core::model::{train, Classifier, ModelConfig, ModelKind, TrainedModel};
use tshap_core::smoothing::uniform_smooth;

const T: usize = 16;

fn small_dataset() -> Vec<FeatureSequence> {
    let cfg = GeneratorConfig {
        seed: 42,
        n_per_class: 8,
        noise_std: 0.02,
        raw_length_range: (24, 40),
    };
    generate_dataset(&cfg)
        .unwrap()
        .iter()
        .map(|s| preprocess(s, T).unwrap())
        .collect()
}

fn small_lstm(data: &[FeatureSequence], epochs: usize) -> TrainedModel {
    train(
        data,
        &ModelConfig {
            kind: ModelKind::Lstm,
            hidden_dim: 12,
            sequence_length: T,
            epochs,
            batch_size: 8,
            seed: 99,
            ..ModelConfig::default()
        },
    )
    .unwrap()
}

#[test]
fn training_reduces_loss_on_separable_data() {
    let cfg = GeneratorConfig {
        seed: 42,
        n_per_class: 16,
        noise_std: 0.02,
        raw_length_range: (24, 40),
    };
    let data: Vec<FeatureSequence> = generate_dataset(&cfg)
        .unwrap()
        .iter()
        .map(|s| preprocess(s, T).unwrap())
        .collect();
    let model = train(
        &data,
        &ModelConfig {
            kind: ModelKind::Lstm,
            hidden_dim: 12,
            sequence_length: T,
            epochs: 30,
            batch_size: 8,
            seed: 99,
            ..ModelConfig::default()
        },
    )
    .unwrap();
    let initial = model.history.first().unwrap().loss;
    let last = model.history.last().unwrap().loss;
    assert!(
        last < 0.5 * initial,
        "final loss {last} not below half of initial {initial}"
    );
}

#[test]
fn per_frame_efficiency_on_trained_model() {
    // Exact Shapley sums to v(full) − v(empty frame) for every frame.
    let data = small_dataset();
    let model = small_lstm(&data, 4);
    let grouping = Grouping::body_parts();
    let x = &data[3];
    let (target, _) = model.predict(x).unwrap();

    let map = shapley_full(&model, x, &grouping, ShapMode::Exact, target).unwrap();
    for t in 0..x.len() {
        let v_full = model.predict_proba(x).unwrap()[target];
        let frame_cells: Vec<(usize, usize)> = (0..75).map(|f| (t, f)).collect();
        let masked = mask_features(x, &MaskSpec::new(frame_cells).unwrap()).unwrap();
        let v_empty = model.predict_proba(&masked).unwrap()[target];
        let phi_sum: f64 = map.values.row(t).iter().sum();
        assert!(
            (phi_sum - (v_full - v_empty)).abs() <= 1e-9,
            "frame {t}: sum {phi_sum} vs {v_full} - {v_empty}"
        );
        // Row t of the full map equals the standalone frame computation.
        let standalone = exact_shapley_frame(&model, x, t, &grouping, target).unwrap();
        for (a, b) in map.values.row(t).iter().zip(&standalone) {
            assert_eq!(a, b);
        }
    }
}

#[test]
fn constant_output_model_gets_zero_map() {
    // Zero dense weights make every coalition value identical.
    let data = small_dataset();
    let cfg = ModelConfig {
        kind: ModelKind::Lstm,
        hidden_dim: 6,
        sequence_length: T,
        epochs: 1,
        seed: 5,
        ..ModelConfig::default()
    };
    let mut model = TrainedModel {
        params: tshap_core::model::ModelParameters::init(&cfg),
        config: cfg,
        history: vec![],
    };
    if let tshap_core::model::ModelParameters::Lstm(p) = &mut model.params {
        p.dense_w = Mat::zeros(p.class_count, p.hidden_dim);
        p.dense_b = vec![0.0; p.class_count];
    }
    let grouping = Grouping::body_parts();
    let map = shapley_full(&model, &data[0], &grouping, ShapMode::Exact, 0).unwrap();
    assert!(map.values.data().iter().all(|&v| v == 0.0));
}

#[test]
fn attribution_methods_do_not_disturb_predictions() {
    let data = small_dataset();
    let lstm = small_lstm(&data, 3);
    let cnn = train(
        &data,
        &ModelConfig {
            kind: ModelKind::Cnn,
            hidden_dim: 8,
            sequence_length: T,
            epochs: 3,
            batch_size: 8,
            seed: 123,
            ..ModelConfig::default()
        },
    )
    .unwrap();
    let grouping = Grouping::body_parts();

    for x in data.iter().take(4) {
        let before_lstm = lstm.predict(x).unwrap();
        let before_cnn = cnn.predict(x).unwrap();

        let _ = shapley_full(
            &lstm,
            x,
            &grouping,
            ShapMode::Sampled {
                n_permutations: 4,
                seed: 9,
            },
            before_lstm.0,
        )
        .unwrap();
        let _ = gradient_saliency(&lstm, x, before_lstm.0).unwrap();
        let _ = grad_cam_map(&cnn, x, &grouping, before_cnn.0).unwrap();

        assert_eq!(lstm.predict(x).unwrap(), before_lstm);
        assert_eq!(cnn.predict(x).unwrap(), before_cnn);
    }
}

#[test]
fn smoothing_reduces_temporal_variance_of_noisy_maps() {
    // Signal + i.i.d. noise columns: TV drops after smoothing in at least
    // 95% of seeded trials.
    use tshap_core::attribution::{AttributionMap, Granularity};
    use tshap_core::rng::SplitMix64;

    let trials = 100;
    let t_len = 40;
    let mut wins = 0;
    for trial in 0..trials {
        let mut rng = SplitMix64::from_path(7001, &[trial]);
        let values = Mat::from_fn(t_len, 75, |t, g| {
            let signal = ((t as f64 / 6.0) + g as f64).sin();
            signal + rng.normal(0.0, 0.5)
        });
        let map = AttributionMap::new(values, Granularity::PerFeature, None, 0, "raw").unwrap();
        let raw_tv = temporal_variance(&map).unwrap();
        let smooth_tv = temporal_variance(&uniform_smooth(&map, 1)).unwrap();
        if smooth_tv < raw_tv {
            wins += 1;
        }
    }
    assert!(
        wins as f64 / trials as f64 >= 0.95,
        "TV dropped in only {wins}/{trials} trials"
    );
}

#[test]
fn subject_split_has_no_identity_leakage_end_to_end() {
    let data = small_dataset();
    let folds = kfold_split(&data, 4, 11).unwrap();
    for fold in 0..4 {
        let train_idx = folds.train_indices(&data, fold);
        let test_idx = folds.test_indices(&data, fold);
        for &i in &train_idx {
            for &j in &test_idx {
                assert_ne!(data[i].subject_id, data[j].subject_id);
            }
        }
    }
}
