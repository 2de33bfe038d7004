use std::collections::{BTreeSet, HashMap};
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::features::FeatureDictionary;
use super::inference::{marginals, Potentials};
use super::{FeatureTemplate, TaggerError, TrainConfig};
use crate::corpus::Sentence;

pub const MODEL_FORMAT: &str = "label-audit-crf";
pub const MODEL_VERSION: u32 = 1;

/// `O` followed by `B-T`, `I-T` for each type in sorted order.
pub fn label_set<'a>(types: impl IntoIterator<Item = &'a String>) -> Vec<String> {
    let sorted: BTreeSet<&String> = types.into_iter().collect();
    let mut labels = vec!["O".to_string()];
    for t in sorted {
        labels.push(format!("B-{t}"));
        labels.push(format!("I-{t}"));
    }
    labels
}

/// A trained linear-chain CRF.
///
/// The parameter vector is laid out as `attributes x labels` emission
/// weights (index `attr * L + label`) followed by the `L x L` transition
/// matrix (index `offset + prev * L + cur`). Gradients use the same layout.
#[derive(Debug, Clone, PartialEq)]
pub struct CrfModel {
    labels: Vec<String>,
    label_index: HashMap<String, usize>,
    dictionary: FeatureDictionary,
    weights: Vec<f64>,
    config: TrainConfig,
}

/// A sentence mapped onto model indices.
#[derive(Debug, Clone)]
pub(crate) struct Encoded {
    pub features: Vec<Vec<u32>>,
    pub gold: Vec<usize>,
}

impl CrfModel {
    /// A zero-weight model.
    pub fn new(labels: Vec<String>, dictionary: FeatureDictionary, config: TrainConfig) -> Self {
        assert!(labels.first().map(String::as_str) == Some("O"), "label set starts with O");
        let dim = dictionary.len() * labels.len() + labels.len() * labels.len();
        let label_index = labels.iter().enumerate().map(|(i, l)| (l.clone(), i)).collect();
        CrfModel {
            labels,
            label_index,
            dictionary,
            weights: vec![0.0; dim],
            config,
        }
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn num_labels(&self) -> usize {
        self.labels.len()
    }

    pub fn dictionary(&self) -> &FeatureDictionary {
        &self.dictionary
    }

    pub fn templates(&self) -> &[FeatureTemplate] {
        self.dictionary.templates()
    }

    pub fn config(&self) -> &TrainConfig {
        &self.config
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn weights_mut(&mut self) -> &mut [f64] {
        &mut self.weights
    }

    pub fn dimension(&self) -> usize {
        self.weights.len()
    }

    /// Number of emission weights (attributes crossed with labels).
    pub fn emission_len(&self) -> usize {
        self.dictionary.len() * self.labels.len()
    }

    pub fn emission_index(&self, attribute: u32, label: usize) -> usize {
        attribute as usize * self.labels.len() + label
    }

    pub fn transition_index(&self, prev: usize, cur: usize) -> usize {
        self.emission_len() + prev * self.labels.len() + cur
    }

    pub fn label_id(&self, label: &str) -> Option<usize> {
        self.label_index.get(label).copied()
    }

    pub(crate) fn encode(&self, sentence: &Sentence) -> Result<Encoded, TaggerError> {
        let gold = sentence
            .tokens
            .iter()
            .map(|t| {
                self.label_id(&t.label)
                    .ok_or_else(|| TaggerError::UnknownLabel(t.label.clone()))
            })
            .collect::<Result<_, _>>()?;
        Ok(Encoded {
            features: self.dictionary.encode(sentence),
            gold,
        })
    }

    pub(crate) fn potentials_encoded(&self, features: &[Vec<u32>]) -> Potentials {
        let l = self.labels.len();
        let mut unary = vec![0.0; features.len() * l];
        for (row, active) in unary.chunks_mut(l).zip(features) {
            for &a in active {
                let base = a as usize * l;
                for (u, w) in row.iter_mut().zip(&self.weights[base..base + l]) {
                    *u += w;
                }
            }
        }
        let t0 = self.emission_len();
        Potentials::new(features.len(), l, unary, self.weights[t0..].to_vec())
    }

    /// Unary scores (sum of active emission weights) and transitions.
    /// Features missing from the dictionary contribute nothing.
    pub fn sentence_potentials(&self, sentence: &Sentence) -> Potentials {
        self.potentials_encoded(&self.dictionary.encode(sentence))
    }

    /// Adds the log-likelihood gradient of one sentence into `grad`,
    /// marking every touched attribute. Returns the log-likelihood.
    pub(crate) fn accumulate_gradient(
        &self,
        enc: &Encoded,
        grad: &mut [f64],
        touched: &mut Touched,
    ) -> f64 {
        let l = self.labels.len();
        let pot = self.potentials_encoded(&enc.features);
        let m = marginals(&pot);
        let gold_score = pot.path_score(&enc.gold);
        for (i, active) in enc.features.iter().enumerate() {
            let y = enc.gold[i];
            for &a in active {
                touched.mark(a);
                let base = a as usize * l;
                grad[base + y] += 1.0;
                for c in 0..l {
                    grad[base + c] -= m.node(i, c);
                }
            }
        }
        let t0 = self.emission_len();
        for i in 1..enc.gold.len() {
            grad[t0 + enc.gold[i - 1] * l + enc.gold[i]] += 1.0;
        }
        for (k, slot) in grad[t0..].iter_mut().enumerate() {
            let expected: f64 = (0..enc.gold.len().saturating_sub(1))
                .map(|i| m.edge[i * l * l + k])
                .sum();
            *slot -= expected;
        }
        gold_score - m.log_z
    }

    /// Log-likelihood of the gold labels and its gradient (empirical minus
    /// expected feature counts), without regularization.
    pub fn log_likelihood_grad(&self, sentence: &Sentence) -> Result<(f64, Vec<f64>), TaggerError> {
        let enc = self.encode(sentence)?;
        let mut grad = vec![0.0; self.weights.len()];
        let mut touched = Touched::new(self.dictionary.len());
        let ll = self.accumulate_gradient(&enc, &mut grad, &mut touched);
        Ok((ll, grad))
    }

    pub fn log_likelihood(&self, sentence: &Sentence) -> Result<f64, TaggerError> {
        let enc = self.encode(sentence)?;
        let pot = self.potentials_encoded(&enc.features);
        Ok(pot.path_score(&enc.gold) - super::forward_log_partition(&pot))
    }

    /// Best label sequence (raw, without BIO repair).
    pub fn decode_raw(&self, sentence: &Sentence) -> Vec<String> {
        let (path, _) = super::viterbi(&self.sentence_potentials(sentence));
        path.into_iter().map(|i| self.labels[i].clone()).collect()
    }

    pub fn to_json(&self) -> Result<String, TaggerError> {
        if self.weights.iter().any(|w| !w.is_finite()) {
            return Err(TaggerError::ModelFormat("non-finite weight".into()));
        }
        let file = ModelFile {
            format: MODEL_FORMAT.to_string(),
            version: MODEL_VERSION,
            labels: self.labels.clone(),
            templates: self.dictionary.templates().to_vec(),
            attributes: self.dictionary.attributes().to_vec(),
            weights: self.weights.clone(),
            config: self.config.clone(),
        };
        Ok(serde_json::to_string(&file)?)
    }

    pub fn from_json(text: &str) -> Result<CrfModel, TaggerError> {
        let file: ModelFile = serde_json::from_str(text)?;
        if file.format != MODEL_FORMAT {
            return Err(TaggerError::ModelFormat(format!("unexpected format {:?}", file.format)));
        }
        if file.version != MODEL_VERSION {
            return Err(TaggerError::ModelFormat(format!("unsupported version {}", file.version)));
        }
        if file.labels.first().map(String::as_str) != Some("O") {
            return Err(TaggerError::ModelFormat("label set must start with O".into()));
        }
        let n_attr = file.attributes.len();
        let dictionary = FeatureDictionary::from_attributes(file.templates, file.attributes);
        if dictionary.len() != n_attr {
            return Err(TaggerError::ModelFormat("duplicate or unsorted attributes".into()));
        }
        let mut model = CrfModel::new(file.labels, dictionary, file.config);
        if file.weights.len() != model.weights.len() {
            return Err(TaggerError::ModelFormat(format!(
                "expected {} weights, found {}",
                model.weights.len(),
                file.weights.len()
            )));
        }
        model.weights = file.weights;
        Ok(model)
    }

    pub fn save(&self, path: &Path) -> Result<(), TaggerError> {
        crate::io::write_atomic(path, self.to_json()?.as_bytes())?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<CrfModel, TaggerError> {
        CrfModel::from_json(&std::fs::read_to_string(path)?)
    }
}

#[derive(Serialize, Deserialize)]
struct ModelFile {
    format: String,
    version: u32,
    labels: Vec<String>,
    templates: Vec<FeatureTemplate>,
    attributes: Vec<(String, String)>,
    weights: Vec<f64>,
    config: TrainConfig,
}

/// Sparse bookkeeping of attributes touched by a gradient.
pub(crate) struct Touched {
    seen: Vec<bool>,
    pub list: Vec<u32>,
}

impl Touched {
    pub fn new(n: usize) -> Self {
        Touched {
            seen: vec![false; n],
            list: Vec::new(),
        }
    }

    #[inline]
    pub fn mark(&mut self, a: u32) {
        let s = &mut self.seen[a as usize];
        if !*s {
            *s = true;
            self.list.push(a);
        }
    }

    pub fn clear(&mut self) {
        for &a in &self.list {
            self.seen[a as usize] = false;
        }
        self.list.clear();
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::Dataset;
    use crate::tagger::{build_features, forward_log_partition, viterbi};
    use rand::Rng;
    use rand_chacha::rand_core::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn john_model(min_count: usize) -> CrfModel {
        let ds = Dataset::new("d", vec![Sentence::from_pairs(&["John"], &["B-PER"])]).unwrap();
        let dict = build_features(&ds, &[FeatureTemplate::Word, FeatureTemplate::Bias], min_count).unwrap();
        CrfModel::new(label_set(ds.label_alphabet()), dict, TrainConfig::default())
    }

    #[test]
    fn emission_entry_counts() {
        let m = john_model(1);
        assert_eq!(m.labels(), &["O", "B-PER", "I-PER"]);
        assert_eq!(m.emission_len(), 6);
        assert_eq!(john_model(2).emission_len(), 3);
        assert_eq!(m.dimension(), 6 + 9);
    }

    #[test]
    fn zero_model_scores() {
        let m = john_model(1);
        let s = Sentence::from_pairs(&["John", "ran", "home"], &["B-PER", "O", "O"]);
        let pot = m.sentence_potentials(&s);
        assert!(pot.unary_table().iter().all(|&u| u == 0.0));
        let (ll, grad) = m.log_likelihood_grad(&s).unwrap();
        assert!((ll + 3.0 * 3f64.ln()).abs() < 1e-12);
        // "w=ran" is not in the dictionary, so only "w=John" and bias move
        let bias = m.dictionary().lookup("bias", "").unwrap();
        let john = m.dictionary().lookup("w", "John").unwrap();
        assert!((grad[m.emission_index(bias, 0)] - (2.0 - 1.0)).abs() < 1e-12);
        assert!((grad[m.emission_index(john, 1)] - (1.0 - 1.0 / 3.0)).abs() < 1e-12);
        assert!((viterbi(&pot).1).abs() < 1e-15);
    }

    #[test]
    fn bias_weight_shows_up_in_unary() {
        let mut m = john_model(1);
        let bias = m.dictionary().lookup("bias", "").unwrap();
        let idx = m.emission_index(bias, 0);
        m.weights_mut()[idx] = 1.0;
        let s = Sentence::from_pairs(&["x", "y"], &["O", "O"]);
        let pot = m.sentence_potentials(&s);
        for i in 0..2 {
            assert_eq!(pot.unary(i, 0), 1.0);
            assert_eq!(pot.unary(i, 1), 0.0);
        }
    }

    #[test]
    fn unary_matches_hand_enumeration() {
        let ds = Dataset::new(
            "d",
            vec![
                Sentence::from_pairs(&["Ann", "met", "Bob"], &["B-PER", "O", "B-PER"]),
                Sentence::from_pairs(&["in", "Rome"], &["O", "B-LOC"]),
            ],
        )
        .unwrap();
        let templates = FeatureTemplate::default_set();
        let dict = build_features(&ds, &templates, 1).unwrap();
        let mut m = CrfModel::new(label_set(ds.label_alphabet()), dict, TrainConfig::default());
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for w in m.weights_mut() {
            *w = rng.gen_range(-1.0..1.0);
        }
        let s = Sentence::from_pairs(&["Bob", "met", "Zed"], &["O", "O", "O"]);
        let pot = m.sentence_potentials(&s);
        let words = s.words();
        for i in 0..3 {
            for (l, _) in m.labels().iter().enumerate() {
                let mut expected = 0.0;
                for t in &templates {
                    if let Some(a) = m.dictionary().lookup(&t.id(), &t.extract(&words, i)) {
                        expected += m.weights()[m.emission_index(a, l)];
                    }
                }
                assert!((pot.unary(i, l) - expected).abs() < 1e-12);
            }
        }
        assert!(m.log_likelihood(&ds.sentences()[0]).unwrap() <= 0.0);
        let gold = &ds.sentences()[0];
        let gp = m.sentence_potentials(gold);
        let path: Vec<usize> = gold.tokens.iter().map(|t| m.label_id(&t.label).unwrap()).collect();
        assert!(forward_log_partition(&gp) >= gp.path_score(&path));
    }

    #[test]
    fn unknown_label_is_an_error() {
        let m = john_model(1);
        let s = Sentence::from_pairs(&["Rome"], &["B-LOC"]);
        assert!(matches!(m.log_likelihood_grad(&s), Err(TaggerError::UnknownLabel(_))));
    }

    #[test]
    fn json_rejects_wrong_format() {
        let m = john_model(1);
        let text = m.to_json().unwrap().replace(MODEL_FORMAT, "other");
        assert!(CrfModel::from_json(&text).is_err());
        let back = CrfModel::from_json(&m.to_json().unwrap()).unwrap();
        assert_eq!(back, m);
    }
}
