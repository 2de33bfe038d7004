use std::collections::BTreeSet;

use rand::seq::SliceRandom;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::features::{build_features_from, FeatureDictionary};
use super::model::{label_set, CrfModel, Encoded, Touched};
use super::{FeatureTemplate, TaggerError, TrainConfig};
use crate::corpus::{repair_bio2, Dataset, Sentence, Tag};

pub fn train(
    dataset: &Dataset,
    templates: &[FeatureTemplate],
    config: &TrainConfig,
) -> Result<CrfModel, TaggerError> {
    train_sentences(dataset.sentences(), templates, config, None)
}

/// Trains on `sentences`, optionally starting from `warm_start`'s weights.
///
/// A warm-started model keeps every attribute and label of the previous
/// model; the AdaGrad accumulators start fresh.
pub fn train_sentences(
    sentences: &[Sentence],
    templates: &[FeatureTemplate],
    config: &TrainConfig,
    warm_start: Option<&CrfModel>,
) -> Result<CrfModel, TaggerError> {
    train_inner(sentences, templates, config, warm_start, false).map(|(m, _)| m)
}

/// Like [`train`], additionally returning the regularized objective
/// `sum(log-likelihood) - l2 * |w|^2 / 2` after every epoch.
pub fn train_with_trace(
    dataset: &Dataset,
    templates: &[FeatureTemplate],
    config: &TrainConfig,
) -> Result<(CrfModel, Vec<f64>), TaggerError> {
    train_inner(dataset.sentences(), templates, config, None, true)
}

fn initial_model(
    sentences: &[Sentence],
    templates: &[FeatureTemplate],
    config: &TrainConfig,
    warm_start: Option<&CrfModel>,
) -> Result<CrfModel, TaggerError> {
    let mut types: BTreeSet<String> = BTreeSet::new();
    for s in sentences {
        for t in &s.tokens {
            if let Some(ty) = Tag::parse(&t.label).and_then(|t| t.entity_type()) {
                types.insert(ty.to_string());
            }
        }
    }
    let fresh = build_features_from(sentences, templates, config.min_count)?;
    let Some(prev) = warm_start else {
        return Ok(CrfModel::new(label_set(&types), fresh, config.clone()));
    };
    for l in prev.labels() {
        if let Some(ty) = Tag::parse(l).and_then(|t| t.entity_type()) {
            types.insert(ty.to_string());
        }
    }
    let mut attributes = fresh.attributes().to_vec();
    attributes.extend_from_slice(prev.dictionary().attributes());
    let mut all_templates = fresh.templates().to_vec();
    all_templates.extend_from_slice(prev.templates());
    all_templates.sort();
    all_templates.dedup();
    let dictionary = FeatureDictionary::from_attributes(all_templates, attributes);
    let mut model = CrfModel::new(label_set(&types), dictionary, config.clone());
    let label_map: Vec<usize> = prev
        .labels()
        .iter()
        .map(|l| model.label_id(l).expect("labels are a superset"))
        .collect();
    for (a, (id, value)) in prev.dictionary().attributes().iter().enumerate() {
        let new_a = model.dictionary().lookup(id, value).expect("attributes are a superset");
        for (old_l, &new_l) in label_map.iter().enumerate() {
            let w = prev.weights()[prev.emission_index(a as u32, old_l)];
            let j = model.emission_index(new_a, new_l);
            model.weights_mut()[j] = w;
        }
    }
    for (p_old, &p_new) in label_map.iter().enumerate() {
        for (c_old, &c_new) in label_map.iter().enumerate() {
            let w = prev.weights()[prev.transition_index(p_old, c_old)];
            let j = model.transition_index(p_new, c_new);
            model.weights_mut()[j] = w;
        }
    }
    Ok(model)
}

struct AdaGrad {
    accum: Vec<f64>,
    lr: f64,
    eps: f64,
}

impl AdaGrad {
    #[inline]
    fn step(&mut self, w: &mut f64, j: usize, g: f64) {
        self.accum[j] += g * g;
        *w += self.lr * g / (self.accum[j].sqrt() + self.eps);
    }
}

fn train_inner(
    sentences: &[Sentence],
    templates: &[FeatureTemplate],
    config: &TrainConfig,
    warm_start: Option<&CrfModel>,
    trace: bool,
) -> Result<(CrfModel, Vec<f64>), TaggerError> {
    config.validate()?;
    if sentences.is_empty() {
        return Err(TaggerError::EmptyDataset);
    }
    let mut model = initial_model(sentences, templates, config, warm_start)?;
    let encoded: Vec<Encoded> = sentences
        .iter()
        .map(|s| model.encode(s))
        .collect::<Result<_, _>>()?;

    let dim = model.dimension();
    let l = model.num_labels();
    let t0 = model.emission_len();
    let n = encoded.len();
    let mut opt = AdaGrad {
        accum: vec![0.0; dim],
        lr: config.learning_rate,
        eps: config.epsilon,
    };
    let mut grad = vec![0.0; dim];
    let mut touched = Touched::new(model.dictionary().len());
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut order: Vec<usize> = (0..n).collect();
    let mut objectives = Vec::new();

    for epoch in 0..config.epochs {
        if config.full_batch {
            for (i, enc) in encoded.iter().enumerate() {
                let ll = model.accumulate_gradient(enc, &mut grad, &mut touched);
                if !ll.is_finite() {
                    return Err(TaggerError::NonFinite { epoch, sentence: i });
                }
            }
            let weights = model.weights_mut();
            for j in 0..dim {
                let g = grad[j] - config.l2 * weights[j];
                opt.step(&mut weights[j], j, g);
                grad[j] = 0.0;
            }
            touched.clear();
        } else {
            // the regularizer is split evenly across sentences and applied
            // lazily to the coordinates each sentence touches
            let reg = config.l2 / n as f64;
            if config.shuffle {
                order.shuffle(&mut rng);
            }
            for &i in &order {
                let ll = model.accumulate_gradient(&encoded[i], &mut grad, &mut touched);
                if !ll.is_finite() {
                    return Err(TaggerError::NonFinite { epoch, sentence: i });
                }
                let weights = model.weights_mut();
                for &a in &touched.list {
                    let base = a as usize * l;
                    for j in base..base + l {
                        let g = grad[j] - reg * weights[j];
                        opt.step(&mut weights[j], j, g);
                        grad[j] = 0.0;
                    }
                }
                for j in t0..dim {
                    let g = grad[j] - reg * weights[j];
                    opt.step(&mut weights[j], j, g);
                    grad[j] = 0.0;
                }
                touched.clear();
            }
        }
        if trace {
            objectives.push(objective(&model, &encoded, config.l2));
        }
    }
    Ok((model, objectives))
}

fn objective(model: &CrfModel, encoded: &[Encoded], l2: f64) -> f64 {
    let ll: f64 = encoded
        .iter()
        .map(|enc| {
            let pot = model.potentials_encoded(&enc.features);
            pot.path_score(&enc.gold) - super::forward_log_partition(&pot)
        })
        .sum();
    let norm: f64 = model.weights().iter().map(|w| w * w).sum();
    ll - l2 * norm / 2.0
}

/// Viterbi-decodes each sentence and repairs illegal `I-` tags to `B-`.
pub fn predict(model: &CrfModel, sentences: &[Sentence]) -> Vec<Vec<String>> {
    sentences
        .iter()
        .map(|s| {
            let mut labels = model.decode_raw(s);
            repair_bio2(&mut labels);
            labels
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::{synthesize_corpus, validate_bio2, SynthConfig};

    fn one_sentence() -> Dataset {
        Dataset::new(
            "one",
            vec![Sentence::from_pairs(
                &["Peter", "Blackburn", "visited", "Rome", "."],
                &["B-PER", "I-PER", "O", "B-LOC", "O"],
            )],
        )
        .unwrap()
    }

    #[test]
    fn overfits_one_sentence() {
        let ds = one_sentence();
        let cfg = TrainConfig {
            epochs: 50,
            ..TrainConfig::default()
        };
        let model = train(&ds, &FeatureTemplate::default_set(), &cfg).unwrap();
        let pred = predict(&model, ds.sentences());
        assert_eq!(pred[0], ds.sentences()[0].labels());
    }

    #[test]
    fn zero_epochs_rejected() {
        let cfg = TrainConfig {
            epochs: 0,
            ..TrainConfig::default()
        };
        assert!(matches!(
            train(&one_sentence(), &FeatureTemplate::default_set(), &cfg),
            Err(TaggerError::InvalidConfig(_))
        ));
        assert!(matches!(
            train(&Dataset::empty("e"), &FeatureTemplate::default_set(), &TrainConfig::default()),
            Err(TaggerError::EmptyDataset)
        ));
    }

    #[test]
    fn deterministic_weights() {
        let cfg = SynthConfig::new(80, 40, vec!["A".into(), "B".into()], 5);
        let ds = synthesize_corpus(&cfg).unwrap();
        let tc = TrainConfig {
            epochs: 3,
            seed: 17,
            ..TrainConfig::default()
        };
        let a = train(&ds, &FeatureTemplate::default_set(), &tc).unwrap();
        let b = train(&ds, &FeatureTemplate::default_set(), &tc).unwrap();
        let bits = |m: &CrfModel| m.weights().iter().map(|w| w.to_bits()).collect::<Vec<_>>();
        assert_eq!(bits(&a), bits(&b));
    }

    #[test]
    fn full_batch_objective_is_non_decreasing() {
        let cfg = SynthConfig::new(30, 20, vec!["A".into(), "B".into()], 2);
        let ds = synthesize_corpus(&cfg).unwrap();
        let tc = TrainConfig {
            epochs: 25,
            full_batch: true,
            learning_rate: 0.05,
            l2: 0.1,
            ..TrainConfig::default()
        };
        let (_, trace) = train_with_trace(&ds, &FeatureTemplate::default_set(), &tc).unwrap();
        assert_eq!(trace.len(), 25);
        for w in trace.windows(2) {
            assert!(w[1] >= w[0] - 1e-9, "objective dropped: {} -> {}", w[0], w[1]);
        }
    }

    #[test]
    fn predict_output_is_valid_bio2() {
        let cfg = SynthConfig::new(60, 30, vec!["A".into(), "B".into(), "C".into()], 8);
        let ds = synthesize_corpus(&cfg).unwrap();
        let tc = TrainConfig {
            epochs: 2,
            ..TrainConfig::default()
        };
        let model = train(&ds, &FeatureTemplate::default_set(), &tc).unwrap();
        assert!(predict(&model, &[]).is_empty());
        for labels in predict(&model, ds.sentences()) {
            assert!(validate_bio2(&labels).is_ok());
        }
    }

    #[test]
    fn warm_start_keeps_previous_knowledge() {
        let first = one_sentence();
        let cfg = TrainConfig {
            epochs: 30,
            ..TrainConfig::default()
        };
        let t = FeatureTemplate::default_set();
        let m1 = train(&first, &t, &cfg).unwrap();
        let second = vec![Sentence::from_pairs(&["Ann", "left", "Paris"], &["B-ORG", "O", "B-LOC"])];
        let m2 = train_sentences(&second, &t, &cfg, Some(&m1)).unwrap();
        assert!(m2.labels().contains(&"B-PER".to_string()));
        assert!(m2.labels().contains(&"B-ORG".to_string()));
        assert!(m2.dictionary().lookup("w", "Peter").is_some());
        let pred = predict(&m2, first.sentences());
        assert_eq!(pred[0][0], "B-PER");
    }
}
