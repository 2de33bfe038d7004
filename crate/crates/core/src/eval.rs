//! Span-exact precision, recall and F1 (conlleval semantics).

use std::collections::{BTreeMap, HashSet};
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::corpus::{extract_spans, CorpusError, Dataset, Span};
use crate::tagger::{predict, CrfModel};

#[derive(Debug, Error)]
pub enum EvalError {
    #[error("gold has {gold} sentences but predictions have {predicted}")]
    CountMismatch { gold: usize, predicted: usize },
    #[error("sentence {sentence}: gold has {gold} tokens but prediction has {predicted}")]
    LengthMismatch {
        sentence: usize,
        gold: usize,
        predicted: usize,
    },
    #[error("sentence {sentence}: {source}")]
    InvalidLabels {
        sentence: usize,
        #[source]
        source: CorpusError,
    },
}

/// Match counts with derived scores.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct Scores {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub true_positives: usize,
    pub predicted: usize,
    pub gold: usize,
}

impl Scores {
    /// Scores from counts with the 0/0 = 0 convention.
    pub fn from_counts(true_positives: usize, predicted: usize, gold: usize) -> Self {
        let ratio = |a: usize, b: usize| if b == 0 { 0.0 } else { a as f64 / b as f64 };
        let precision = ratio(true_positives, predicted);
        let recall = ratio(true_positives, gold);
        let f1 = if precision + recall == 0.0 {
            0.0
        } else {
            2.0 * precision * recall / (precision + recall)
        };
        Scores {
            precision,
            recall,
            f1,
            true_positives,
            predicted,
            gold,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalResult {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub true_positives: usize,
    pub predicted: usize,
    pub gold: usize,
    pub per_type: BTreeMap<String, Scores>,
}

impl EvalResult {
    pub fn micro(&self) -> Scores {
        Scores::from_counts(self.true_positives, self.predicted, self.gold)
    }

    /// `P R F1` as percentages with two decimals, e.g. `58.35 47.95 52.64`.
    pub fn table_row(&self) -> String {
        format!(
            "{:.2} {:.2} {:.2}",
            100.0 * self.precision,
            100.0 * self.recall,
            100.0 * self.f1
        )
    }

    /// A conlleval-style summary with one line per entity type.
    pub fn conlleval_report(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(
            out,
            "processed {} gold phrases; found: {} phrases; correct: {}.",
            self.gold, self.predicted, self.true_positives
        );
        let _ = writeln!(
            out,
            "{:>17}  precision: {:6.2}%; recall: {:6.2}%; FB1: {:6.2}",
            "overall",
            100.0 * self.precision,
            100.0 * self.recall,
            100.0 * self.f1
        );
        for (ty, s) in &self.per_type {
            let _ = writeln!(
                out,
                "{:>17}: precision: {:6.2}%; recall: {:6.2}%; FB1: {:6.2}  {}",
                ty,
                100.0 * s.precision,
                100.0 * s.recall,
                100.0 * s.f1,
                s.predicted
            );
        }
        out
    }
}

fn spans_of(labels: &[String], sentence: usize) -> Result<Vec<Span>, EvalError> {
    extract_spans(labels).map_err(|source| EvalError::InvalidLabels { sentence, source })
}

/// Micro-averaged span-exact evaluation. A predicted span is a true
/// positive iff the same sentence has a gold span with identical start,
/// end and type.
pub fn evaluate(gold: &[Vec<String>], predicted: &[Vec<String>]) -> Result<EvalResult, EvalError> {
    if gold.len() != predicted.len() {
        return Err(EvalError::CountMismatch {
            gold: gold.len(),
            predicted: predicted.len(),
        });
    }
    // (tp, predicted, gold) per type
    let mut counts: BTreeMap<String, (usize, usize, usize)> = BTreeMap::new();
    for (i, (g, p)) in gold.iter().zip(predicted).enumerate() {
        if g.len() != p.len() {
            return Err(EvalError::LengthMismatch {
                sentence: i,
                gold: g.len(),
                predicted: p.len(),
            });
        }
        let gs = spans_of(g, i)?;
        let ps = spans_of(p, i)?;
        let gold_set: HashSet<&Span> = gs.iter().collect();
        for s in &gs {
            counts.entry(s.entity_type.clone()).or_default().2 += 1;
        }
        for s in &ps {
            let entry = counts.entry(s.entity_type.clone()).or_default();
            entry.1 += 1;
            if gold_set.contains(s) {
                entry.0 += 1;
            }
        }
    }
    let (mut tp, mut np, mut ng) = (0, 0, 0);
    let per_type = counts
        .into_iter()
        .map(|(ty, (t, p, g))| {
            tp += t;
            np += p;
            ng += g;
            (ty, Scores::from_counts(t, p, g))
        })
        .collect();
    let micro = Scores::from_counts(tp, np, ng);
    Ok(EvalResult {
        precision: micro.precision,
        recall: micro.recall,
        f1: micro.f1,
        true_positives: tp,
        predicted: np,
        gold: ng,
        per_type,
    })
}

/// Decodes `test` with `model` and scores the predictions.
pub fn evaluate_model(model: &CrfModel, test: &Dataset) -> Result<EvalResult, EvalError> {
    let gold: Vec<Vec<String>> = test.sentences().iter().map(|s| s.labels()).collect();
    let predicted = predict(model, test.sentences());
    evaluate(&gold, &predicted)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::Sentence;
    use crate::tagger::{build_features, label_set, FeatureTemplate, TrainConfig};

    fn v(tags: &[&str]) -> Vec<String> {
        tags.iter().map(|s| s.to_string()).collect()
    }

    #[test]
    fn identity_is_perfect() {
        let g = vec![v(&["B-PER", "I-PER", "O"]), v(&["B-LOC"])];
        let r = evaluate(&g, &g).unwrap();
        assert_eq!((r.precision, r.recall, r.f1), (1.0, 1.0, 1.0));
    }

    #[test]
    fn worked_example() {
        let g = vec![v(&["B-PER", "I-PER", "O", "O"])];
        let p = vec![v(&["B-PER", "I-PER", "O", "B-LOC"])];
        let r = evaluate(&g, &p).unwrap();
        assert_eq!(r.precision, 0.5);
        assert_eq!(r.recall, 1.0);
        assert!((r.f1 - 2.0 / 3.0).abs() < 1e-15);
        assert_eq!(r.per_type["LOC"].predicted, 1);
        assert_eq!(r.per_type["LOC"].gold, 0);
        assert_eq!(r.per_type["PER"].f1, 1.0);
    }

    #[test]
    fn boundary_and_type_must_both_match() {
        let g = vec![v(&["B-A", "I-A", "O"])];
        assert_eq!(evaluate(&g, &[v(&["B-A", "O", "O"])]).unwrap().true_positives, 0);
        assert_eq!(evaluate(&g, &[v(&["B-B", "I-B", "O"])]).unwrap().true_positives, 0);
    }

    #[test]
    fn zero_conventions() {
        let g = vec![v(&["B-A", "O"])];
        let p = vec![v(&["O", "O"])];
        let r = evaluate(&g, &p).unwrap();
        assert_eq!((r.precision, r.recall, r.f1), (0.0, 0.0, 0.0));
        let r = evaluate(&[v(&["O"])], &[v(&["O"])]).unwrap();
        assert_eq!((r.precision, r.recall, r.f1), (0.0, 0.0, 0.0));
    }

    #[test]
    fn mismatches_name_the_sentence() {
        let g = vec![v(&["O"]), v(&["O", "O"])];
        let p = vec![v(&["O"]), v(&["O"])];
        match evaluate(&g, &p).unwrap_err() {
            EvalError::LengthMismatch { sentence, .. } => assert_eq!(sentence, 1),
            e => panic!("unexpected {e}"),
        }
        assert!(matches!(
            evaluate(&g, &p[..1]),
            Err(EvalError::CountMismatch { .. })
        ));
        assert!(matches!(
            evaluate(&[v(&["I-A"])], &[v(&["O"])]),
            Err(EvalError::InvalidLabels { sentence: 0, .. })
        ));
    }

    #[test]
    fn table_row_format() {
        let r = evaluate(&[v(&["B-A", "O", "B-A"])], &[v(&["B-A", "O", "O"])]).unwrap();
        assert_eq!(r.table_row(), "100.00 50.00 66.67");
        assert!(r.conlleval_report().contains("overall"));
    }

    #[test]
    fn all_outside_model_scores_zero() {
        let test = Dataset::new(
            "t",
            vec![Sentence::from_pairs(&["Ann", "ran"], &["B-PER", "O"])],
        )
        .unwrap();
        let dict = build_features(&test, &[FeatureTemplate::Bias], 1).unwrap();
        // all-zero weights decode to label 0 = O everywhere
        let model = CrfModel::new(label_set(test.label_alphabet()), dict, TrainConfig::default());
        let r = evaluate_model(&model, &test).unwrap();
        assert_eq!((r.precision, r.recall, r.f1), (0.0, 0.0, 0.0));
        assert_eq!(r.gold, 1);
    }
}
