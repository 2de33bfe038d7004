//! Oracles and fixtures shared by the integration tests.
#![allow(dead_code)]

use std::collections::HashSet;

use label_audit::corpus::{
    corrupt_labels, synthesize_corpus, CorruptionMode, CorruptionSpec, Dataset, Sentence, SynthConfig,
};
use label_audit::tagger::Potentials;
use rand::Rng;

/// Every label sequence of the given length, in lexicographic order.
pub fn all_paths(len: usize, labels: usize) -> Vec<Vec<usize>> {
    let mut out = vec![Vec::new()];
    for _ in 0..len {
        out = out
            .into_iter()
            .flat_map(|p: Vec<usize>| {
                (0..labels).map(move |c| {
                    let mut q = p.clone();
                    q.push(c);
                    q
                })
            })
            .collect();
    }
    out
}

pub fn brute_log_z(p: &Potentials) -> f64 {
    let scores: Vec<f64> = all_paths(p.len(), p.num_labels())
        .iter()
        .map(|path| p.path_score(path))
        .collect();
    let m = scores.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    m + scores.iter().map(|s| (s - m).exp()).sum::<f64>().ln()
}

pub fn brute_max(p: &Potentials) -> f64 {
    all_paths(p.len(), p.num_labels())
        .iter()
        .map(|path| p.path_score(path))
        .fold(f64::NEG_INFINITY, f64::max)
}

/// `P(y_i = c)` by summing path probabilities.
pub fn brute_node_marginals(p: &Potentials) -> Vec<f64> {
    let (n, l) = (p.len(), p.num_labels());
    let log_z = brute_log_z(p);
    let mut out = vec![0.0; n * l];
    for path in all_paths(n, l) {
        let prob = (p.path_score(&path) - log_z).exp();
        for (i, &c) in path.iter().enumerate() {
            out[i * l + c] += prob;
        }
    }
    out
}

pub fn random_potentials<R: Rng>(rng: &mut R, len: usize, labels: usize, scale: f64) -> Potentials {
    let unary = (0..len * labels).map(|_| rng.gen_range(-scale..scale)).collect();
    let transition = (0..labels * labels).map(|_| rng.gen_range(-scale..scale)).collect();
    Potentials::new(len, labels, unary, transition)
}

/// A random valid BIO2 sequence over the given types.
pub fn random_bio2<R: Rng>(rng: &mut R, len: usize, types: &[&str]) -> Vec<String> {
    let mut out: Vec<String> = Vec::with_capacity(len);
    let mut open: Option<&str> = None;
    for _ in 0..len {
        let choice = rng.gen_range(0..3);
        let tag = match (choice, open) {
            (0, _) => {
                open = None;
                "O".to_string()
            }
            (1, Some(t)) => format!("I-{t}"),
            _ => {
                let t = types[rng.gen_range(0..types.len())];
                open = Some(t);
                format!("B-{t}")
            }
        };
        out.push(tag);
    }
    out
}

/// Spans as `(start, end_exclusive, type)` read directly off BIO2 tags.
pub fn oracle_spans(tags: &[String]) -> HashSet<(usize, usize, String)> {
    let mut out = HashSet::new();
    let mut i = 0;
    while i < tags.len() {
        if let Some(t) = tags[i].strip_prefix("B-") {
            let mut j = i + 1;
            while j < tags.len() && tags[j].strip_prefix("I-") == Some(t) {
                j += 1;
            }
            out.insert((i, j, t.to_string()));
            i = j;
        } else {
            i += 1;
        }
    }
    out
}

/// `(true positives, predicted, gold)` by span-set intersection.
pub fn oracle_counts(gold: &[Vec<String>], pred: &[Vec<String>]) -> (usize, usize, usize) {
    let (mut tp, mut np, mut ng) = (0, 0, 0);
    for (g, p) in gold.iter().zip(pred) {
        let gs = oracle_spans(g);
        let ps = oracle_spans(p);
        tp += gs.intersection(&ps).count();
        np += ps.len();
        ng += gs.len();
    }
    (tp, np, ng)
}

pub fn types3() -> Vec<String> {
    vec!["LOC".into(), "ORG".into(), "PER".into()]
}

/// 2000 training and 551 test sentences sharing one codebook.
pub fn synthetic_split() -> (Dataset, Dataset) {
    let all = synthesize_corpus(&SynthConfig::new(2551, 200, types3(), 11)).unwrap();
    let idx: Vec<usize> = (0..all.len()).collect();
    (all.select("train", &idx[..2000]), all.select("test", &idx[2000..]))
}

/// The synthetic split with a fraction of test sentences type-permuted.
pub fn identify_fixture(fraction: f64) -> (Dataset, Dataset, Vec<usize>) {
    let (train, test) = synthetic_split();
    let spec = CorruptionSpec::new(fraction, CorruptionMode::TypePermutation, 5);
    let (corrupted, ids) = corrupt_labels(&test, &spec).unwrap();
    (train, corrupted, ids)
}

pub struct ValidateFixture {
    pub train: Dataset,
    pub good: Dataset,
    pub mistake: Dataset,
    pub corrected: Dataset,
}

/// Corrupted test sentences as mistakes, their pristine copies as corrections.
pub fn validate_fixture(fraction: f64) -> ValidateFixture {
    let (train, test) = synthetic_split();
    let spec = CorruptionSpec::new(fraction, CorruptionMode::TypePermutation, 5);
    let (corrupted, ids) = corrupt_labels(&test, &spec).unwrap();
    let good: Vec<usize> = (0..test.len()).filter(|i| !ids.contains(i)).collect();
    ValidateFixture {
        good: test.select("good", &good),
        mistake: corrupted.select("mistake", &ids),
        corrected: test.select("corrected", &ids),
        train,
    }
}

pub fn tiny_dataset(rows: &[(&[&str], &[&str])]) -> Dataset {
    Dataset::new(
        "tiny",
        rows.iter().map(|(w, l)| Sentence::from_pairs(w, l)).collect(),
    )
    .unwrap()
}
