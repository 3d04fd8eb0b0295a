//! Property tests for the spec-level invariants.

use proptest::prelude::*;

use tshap_core::attribution::{exact_shapley_game, Coalition};
use tshap_core::data::{
    dataset_from_csv, dataset_to_csv, kfold_split, preprocess, synth_sequence, FeatureSequence,
    GeneratorConfig,
};
use tshap_core::linalg::{softmax, Mat};
use tshap_core::metrics::temporal_variance;
use tshap_core::smoothing::{build_operator, uniform_smooth, BoundaryMode};

// Re-exported helper from the data module for round-trip checks.
use tshap_core::data::FEATURE_DIM;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn softmax_is_a_distribution(logits in prop::collection::vec(-500.0_f64..500.0, 1..8)) {
        let p = softmax(&logits);
        prop_assert!((p.iter().sum::<f64>() - 1.0).abs() <= 1e-12);
        prop_assert!(p.iter().all(|&v| v > 0.0));
    }

    #[test]
    fn pipeline_invariant_under_similarity(
        scale in 0.1_f64..20.0,
        dx in -50.0_f64..50.0,
        dy in -50.0_f64..50.0,
        dz in -50.0_f64..50.0,
        class in 0usize..4,
        seed in 0u64..1000,
    ) {
        let cfg = GeneratorConfig { seed: 3, n_per_class: 1, noise_std: 0.01, raw_length_range: (20, 30) };
        let seq = synth_sequence(&cfg, class, 0, seed).unwrap();
        let mut moved = seq.clone();
        for frame in &mut moved.frames {
            for joint in frame.iter_mut() {
                joint[0] = joint[0] * scale + dx;
                joint[1] = joint[1] * scale + dy;
                joint[2] = joint[2] * scale + dz;
            }
        }
        let a = preprocess(&seq, 16).unwrap();
        let b = preprocess(&moved, 16).unwrap();
        for (x, y) in a.data.data().iter().zip(b.data.data()) {
            prop_assert!((x - y).abs() <= 1e-12, "{x} vs {y}");
        }
    }

    #[test]
    fn kfold_is_a_partition(n_subjects in 5usize..25, k in 2usize..5, seed in 0u64..500) {
        prop_assume!(n_subjects >= k);
        let data: Vec<FeatureSequence> = (0..n_subjects as u32)
            .map(|s| FeatureSequence::new(Mat::zeros(3, FEATURE_DIM), 0, s).unwrap())
            .collect();
        let folds = kfold_split(&data, k, seed).unwrap();
        // Every subject in exactly one fold, all folds non-empty.
        prop_assert_eq!(folds.fold_of_subject.len(), n_subjects);
        let mut counts = vec![0usize; k];
        for (_, &f) in &folds.fold_of_subject {
            prop_assert!(f < k);
            counts[f] += 1;
        }
        prop_assert!(counts.iter().all(|&c| c > 0));
        // Round-robin balance: fold sizes differ by at most one.
        let max = counts.iter().max().unwrap();
        let min = counts.iter().min().unwrap();
        prop_assert!(max - min <= 1);
    }

    #[test]
    fn dataset_csv_roundtrip(seed in 0u64..200) {
        let cfg = GeneratorConfig { seed, n_per_class: 1, noise_std: 0.05, raw_length_range: (8, 14) };
        let data: Vec<FeatureSequence> = (0..4)
            .map(|class| preprocess(&synth_sequence(&cfg, class, 0, class as u64).unwrap(), 10).unwrap())
            .collect();
        let text = dataset_to_csv(&data);
        let back = dataset_from_csv(&text).unwrap();
        prop_assert_eq!(back, data);
    }

    #[test]
    fn shapley_efficiency_on_random_tables(
        seed in 0u64..2000,
        n in 2usize..7,
    ) {
        let mut rng = tshap_core::rng::SplitMix64::new(seed);
        let table: Vec<f64> = (0..(1usize << n)).map(|_| rng.uniform(-2.0, 2.0)).collect();
        let mut v = |mask: Coalition| Ok(table[mask as usize]);
        let phi = exact_shapley_game(n, &mut v).unwrap();
        let total: f64 = phi.iter().sum();
        let expected = table[(1usize << n) - 1] - table[0];
        prop_assert!((total - expected).abs() <= 1e-9);
    }

    #[test]
    fn operator_matches_direct_smoothing(
        t_len in 2usize..20,
        w in 0usize..6,
        seed in 0u64..500,
    ) {
        let mut rng = tshap_core::rng::SplitMix64::new(seed);
        let values = Mat::from_fn(t_len, FEATURE_DIM, |_, _| rng.normal(0.0, 1.0));
        let map = tshap_core::attribution::AttributionMap::new(
            values,
            tshap_core::attribution::Granularity::PerFeature,
            None,
            0,
            "raw",
        ).unwrap();
        let direct = uniform_smooth(&map, w);
        let op = build_operator(t_len, w, BoundaryMode::TruncateRenormalize).unwrap();
        op.validate().unwrap();
        let via_op = op.apply(&map.values);
        for (a, b) in direct.values.data().iter().zip(via_op.data()) {
            prop_assert!((a - b).abs() <= 1e-12);
        }
    }

    #[test]
    fn tv_scaling_laws(seed in 0u64..500, shift in -10.0_f64..10.0, scale in -4.0_f64..4.0) {
        let mut rng = tshap_core::rng::SplitMix64::new(seed);
        let values = Mat::from_fn(6, FEATURE_DIM, |_, _| rng.normal(0.0, 1.0));
        let map = tshap_core::attribution::AttributionMap::new(
            values,
            tshap_core::attribution::Granularity::PerFeature,
            None,
            0,
            "raw",
        ).unwrap();
        let tv = temporal_variance(&map).unwrap();

        let shifted = map.with_values(map.values.map(|v| v + shift), "raw");
        prop_assert!((temporal_variance(&shifted).unwrap() - tv).abs() <= 1e-12);

        let scaled = map.with_values(map.values.map(|v| v * scale), "raw");
        let expected = scale * scale * tv;
        let got = temporal_variance(&scaled).unwrap();
        let tolerance = 1e-9 * expected.abs().max(1.0);
        prop_assert!((got - expected).abs() <= tolerance, "{got} vs {expected}");
    }
}
