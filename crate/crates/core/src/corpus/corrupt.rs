//! Seeded injection of annotation mistakes.

use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{extract_spans, render_spans, CorpusError, Dataset, Sentence, Span};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CorruptionMode {
    /// Every span in the sentence moves to the next type of the sorted
    /// alphabet (a cyclic derangement).
    TypePermutation,
    /// One span boundary grows or shrinks by one token.
    BoundaryShift,
    /// One span is relabeled to all-O.
    SpanDrop,
}

impl std::str::FromStr for CorruptionMode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "type-permutation" => Ok(CorruptionMode::TypePermutation),
            "boundary-shift" => Ok(CorruptionMode::BoundaryShift),
            "span-drop" => Ok(CorruptionMode::SpanDrop),
            other => Err(format!("unknown corruption mode {other:?}")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorruptionSpec {
    pub fraction: f64,
    pub mode: CorruptionMode,
    pub seed: u64,
}

impl CorruptionSpec {
    pub fn new(fraction: f64, mode: CorruptionMode, seed: u64) -> Self {
        CorruptionSpec {
            fraction,
            mode,
            seed,
        }
    }

    /// Number of sentences that will be altered in a dataset of `n`.
    pub fn target_count(&self, n: usize) -> usize {
        (self.fraction * n as f64).round() as usize
    }
}

/// Alters exactly `round(fraction * n)` sentences and returns the altered
/// indices in ascending order. Sentences the mode cannot apply to are
/// skipped in favour of the next one in seeded order.
pub fn corrupt_labels(
    dataset: &Dataset,
    spec: &CorruptionSpec,
) -> Result<(Dataset, Vec<usize>), CorpusError> {
    if !(0.0..=1.0).contains(&spec.fraction) {
        return Err(CorpusError::InvalidCorruption(format!(
            "fraction {} outside [0,1]",
            spec.fraction
        )));
    }
    let n = dataset.len();
    let target = spec.target_count(n);
    let types: Vec<String> = dataset.label_alphabet().iter().cloned().collect();
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(&mut rng);

    let mut sentences = dataset.sentences().to_vec();
    let mut altered = Vec::with_capacity(target);
    for &idx in &order {
        if altered.len() == target {
            break;
        }
        if let Some(labels) = apply(&sentences[idx], spec.mode, &types, &mut rng)? {
            for (tok, label) in sentences[idx].tokens.iter_mut().zip(labels) {
                tok.label = label;
            }
            altered.push(idx);
        }
    }
    if altered.len() < target {
        return Err(CorpusError::TooFewEligible {
            requested: target,
            achievable: altered.len(),
        });
    }
    altered.sort_unstable();
    let out = Dataset::new(dataset.name.clone(), sentences)?;
    Ok((out, altered))
}

fn apply(
    sentence: &Sentence,
    mode: CorruptionMode,
    types: &[String],
    rng: &mut ChaCha8Rng,
) -> Result<Option<Vec<String>>, CorpusError> {
    let len = sentence.len();
    let labels = sentence.labels();
    let mut spans = extract_spans(&labels)?;
    if spans.is_empty() {
        return Ok(None);
    }
    match mode {
        CorruptionMode::TypePermutation => {
            if types.len() < 2 {
                return Ok(None);
            }
            for span in &mut spans {
                let pos = types
                    .iter()
                    .position(|t| *t == span.entity_type)
                    .expect("span type is in the alphabet");
                span.entity_type = types[(pos + 1) % types.len()].clone();
            }
            Ok(Some(render_spans(&spans, len)))
        }
        CorruptionMode::SpanDrop => {
            let k = rng.gen_range(0..spans.len());
            spans.remove(k);
            Ok(Some(render_spans(&spans, len)))
        }
        CorruptionMode::BoundaryShift => {
            let mut moves: Vec<(usize, Span)> = Vec::new();
            for (k, s) in spans.iter().enumerate() {
                let free = |i: usize| labels[i] == "O";
                if s.end < len && free(s.end) {
                    moves.push((k, Span::new(s.start, s.end + 1, s.entity_type.clone())));
                }
                if s.start > 0 && free(s.start - 1) {
                    moves.push((k, Span::new(s.start - 1, s.end, s.entity_type.clone())));
                }
                if s.end - s.start >= 2 {
                    moves.push((k, Span::new(s.start, s.end - 1, s.entity_type.clone())));
                    moves.push((k, Span::new(s.start + 1, s.end, s.entity_type.clone())));
                }
            }
            if moves.is_empty() {
                return Ok(None);
            }
            let (k, replacement) = moves.swap_remove(rng.gen_range(0..moves.len()));
            spans[k] = replacement;
            Ok(Some(render_spans(&spans, len)))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::{synthesize_corpus, validate_bio2, SynthConfig};
    use proptest::prelude::*;

    fn corpus(n: usize, seed: u64) -> Dataset {
        let cfg = SynthConfig::new(n, 60, vec!["A".into(), "B".into(), "C".into()], seed);
        synthesize_corpus(&cfg).unwrap()
    }

    #[test]
    fn zero_fraction_is_identity() {
        let ds = corpus(100, 1);
        let (out, idx) = corrupt_labels(&ds, &CorruptionSpec::new(0.0, CorruptionMode::SpanDrop, 3)).unwrap();
        assert_eq!(out, ds);
        assert!(idx.is_empty());
    }

    #[test]
    fn scierc_fraction_alters_147_of_551() {
        let ds = corpus(551, 2);
        let spec = CorruptionSpec::new(0.267, CorruptionMode::TypePermutation, 9);
        assert_eq!(spec.target_count(551), 147);
        let (out, idx) = corrupt_labels(&ds, &spec).unwrap();
        assert_eq!(idx.len(), 147);
        let changed: Vec<usize> = (0..ds.len())
            .filter(|&i| ds.sentences()[i] != out.sentences()[i])
            .collect();
        assert_eq!(changed, idx);
    }

    #[test]
    fn two_type_permutation_swaps() {
        let s1 = Sentence::from_pairs(&["x", "Y", "z"], &["O", "B-A", "O"]);
        let s2 = Sentence::from_pairs(&["Q"], &["B-B"]);
        let s3 = Sentence::from_pairs(&["q"], &["O"]);
        let ds = Dataset::new("d", vec![s1, s2.clone(), s3.clone()]).unwrap();
        // find a seed that picks sentence 0 first
        for seed in 0..100 {
            let spec = CorruptionSpec::new(1.0 / 3.0, CorruptionMode::TypePermutation, seed);
            let (out, idx) = corrupt_labels(&ds, &spec).unwrap();
            if idx == vec![0] {
                assert_eq!(out.sentences()[0].labels(), vec!["O", "B-B", "O"]);
                assert_eq!(out.sentences()[1], s2);
                assert_eq!(out.sentences()[2], s3);
                return;
            }
        }
        panic!("no seed selected sentence 0");
    }

    #[test]
    fn ineligible_sentences_are_skipped() {
        let mut sents = vec![Sentence::from_pairs(&["a"], &["O"]); 8];
        sents.push(Sentence::from_pairs(&["B", "c"], &["B-X", "O"]));
        sents.push(Sentence::from_pairs(&["D"], &["B-Y"]));
        let ds = Dataset::new("d", sents).unwrap();
        let spec = CorruptionSpec::new(0.2, CorruptionMode::TypePermutation, 5);
        let (_, idx) = corrupt_labels(&ds, &spec).unwrap();
        assert_eq!(idx, vec![8, 9]);

        let spec = CorruptionSpec::new(0.3, CorruptionMode::TypePermutation, 5);
        assert_eq!(
            corrupt_labels(&ds, &spec).unwrap_err(),
            CorpusError::TooFewEligible {
                requested: 3,
                achievable: 2
            }
        );
    }

    #[test]
    fn single_type_cannot_be_permuted() {
        let ds = Dataset::new("d", vec![Sentence::from_pairs(&["A"], &["B-X"])]).unwrap();
        let spec = CorruptionSpec::new(1.0, CorruptionMode::TypePermutation, 0);
        assert!(corrupt_labels(&ds, &spec).is_err());
    }

    #[test]
    fn rejects_fraction_out_of_range() {
        let ds = corpus(10, 0);
        assert!(corrupt_labels(&ds, &CorruptionSpec::new(1.5, CorruptionMode::SpanDrop, 0)).is_err());
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(48))]
        #[test]
        fn alters_exact_count_and_stays_valid(
            fraction in 0.0f64..0.6,
            mode_idx in 0usize..3,
            seed in any::<u64>(),
        ) {
            let mode = [CorruptionMode::TypePermutation, CorruptionMode::BoundaryShift, CorruptionMode::SpanDrop][mode_idx];
            let ds = corpus(120, 4);
            let spec = CorruptionSpec::new(fraction, mode, seed);
            let (out, idx) = corrupt_labels(&ds, &spec).unwrap();
            prop_assert_eq!(idx.len(), spec.target_count(ds.len()));
            for (i, (a, b)) in ds.sentences().iter().zip(out.sentences()).enumerate() {
                prop_assert!(validate_bio2(&b.labels()).is_ok());
                prop_assert!(a.same_text(b));
                prop_assert_eq!(a != b, idx.binary_search(&i).is_ok());
            }
            let again = corrupt_labels(&ds, &spec).unwrap();
            prop_assert_eq!(again.1, idx);
        }
    }
}
