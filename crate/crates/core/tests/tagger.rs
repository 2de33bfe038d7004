mod common;

use label_audit::corpus::Sentence;
use label_audit::eval::evaluate_model;
use label_audit::tagger::{
    backward, build_features, forward, forward_log_partition, label_set, marginals, train, viterbi, CrfModel,
    FeatureTemplate, TrainConfig,
};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use common::*;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn inference_matches_enumeration(seed in any::<u64>(), len in 1usize..=6, labels in 1usize..=4) {
        let p = random_potentials(&mut ChaCha8Rng::seed_from_u64(seed), len, labels, 4.0);
        let brute = brute_log_z(&p);
        prop_assert!((forward_log_partition(&p) - brute).abs() <= 1e-10);
        // alpha and beta agree on log Z at every position
        let (a, b) = (forward(&p), backward(&p));
        for i in 0..len {
            let row: Vec<f64> = (0..labels).map(|c| a[i * labels + c] + b[i * labels + c]).collect();
            let m = row.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            let z = m + row.iter().map(|v| (v - m).exp()).sum::<f64>().ln();
            prop_assert!((z - brute).abs() <= 1e-9);
        }
        let (path, score) = viterbi(&p);
        prop_assert!((score - brute_max(&p)).abs() <= 1e-10);
        prop_assert!((p.path_score(&path) - score).abs() <= 1e-10);
        let m = marginals(&p);
        for (i, want) in brute_node_marginals(&p).iter().enumerate() {
            prop_assert!((m.node[i] - want).abs() <= 1e-10);
        }
    }

    #[test]
    fn gradient_matches_central_differences(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let vocab = tiny_dataset(&[(&["Ann", "met", "Bo", "in", "Rome"], &["B-P", "O", "B-P", "O", "B-L"])]);
        let dict = build_features(&vocab, &FeatureTemplate::default_set(), 1).unwrap();
        let labels = label_set(vocab.label_alphabet());
        let mut model = CrfModel::new(labels.clone(), dict, TrainConfig::default());
        for w in model.weights_mut() {
            *w = rng.gen_range(-2.0..2.0);
        }
        let words = ["Ann", "met", "Bo", "in", "Rome", "new"];
        let len = rng.gen_range(1..=5);
        let toks: Vec<&str> = (0..len).map(|_| words[rng.gen_range(0..words.len())]).collect();
        let tags: Vec<&str> = (0..len).map(|_| labels[rng.gen_range(0..labels.len())].as_str()).collect();
        let s = Sentence::from_pairs(&toks, &tags);
        let (ll, grad) = model.log_likelihood_grad(&s).unwrap();
        prop_assert!((ll - model.log_likelihood(&s).unwrap()).abs() < 1e-12);
        let h = 1e-5;
        for _ in 0..30 {
            let k = rng.gen_range(0..model.dimension());
            let w0 = model.weights()[k];
            model.weights_mut()[k] = w0 + h;
            let up = model.log_likelihood(&s).unwrap();
            model.weights_mut()[k] = w0 - h;
            let down = model.log_likelihood(&s).unwrap();
            model.weights_mut()[k] = w0;
            let numeric = (up - down) / (2.0 * h);
            prop_assert!((grad[k] - numeric).abs() <= 1e-4 * grad[k].abs().max(numeric.abs()) + 1e-8);
        }
    }
}

#[test]
fn separable_training_data_is_fit() {
    let (train_set, _) = synthetic_split();
    let small = train_set.select("small", &(0..300).collect::<Vec<_>>());
    let cfg = TrainConfig {
        epochs: 30,
        l2: 0.0,
        ..TrainConfig::default()
    };
    let model = train(&small, &FeatureTemplate::default_set(), &cfg).unwrap();
    let r = evaluate_model(&model, &small).unwrap();
    assert!(r.f1 > 0.99, "training F1 {}", r.f1);
}

#[test]
fn retraining_is_bit_identical() {
    let (train_set, test) = synthetic_split();
    let small = train_set.select("small", &(0..150).collect::<Vec<_>>());
    let cfg = TrainConfig {
        epochs: 3,
        seed: 9,
        ..TrainConfig::default()
    };
    let a = train(&small, &FeatureTemplate::default_set(), &cfg).unwrap();
    let b = train(&small, &FeatureTemplate::default_set(), &cfg).unwrap();
    assert_eq!(a.to_json().unwrap(), b.to_json().unwrap());
    assert_eq!(evaluate_model(&a, &test).unwrap(), evaluate_model(&b, &test).unwrap());
}
