//! Browser bindings for the label-audit demo page.
//!
//! Each export is a thin wrapper around a plain Rust function that returns
//! JSON, so the logic is testable natively.

use label_audit::corpus::{
    corrupt_labels, parse_conll, synthesize_corpus, ConllColumns, CorruptionMode, CorruptionSpec, Sentence,
    SynthConfig,
};
use label_audit::eval::evaluate;
use label_audit::protocol::{run_identify, AuditSettings, Checkpoints};
use label_audit::report::{plot_spec_from_report, render_svg};
use label_audit::tagger::{predict, train, FeatureTemplate, TrainConfig};
use serde::Serialize;
use wasm_bindgen::prelude::*;

#[derive(Serialize)]
struct Tagged {
    tokens: Vec<String>,
    labels: Vec<String>,
    spans: Vec<(usize, usize, String)>,
}

/// Trains a CRF on CoNLL text and tags one whitespace-tokenized sentence.
pub fn tag_sentence(train_conll: &str, sentence: &str, epochs: usize) -> Result<String, String> {
    let data = parse_conll(train_conll, ConllColumns::default()).map_err(|e| e.to_string())?;
    let cfg = TrainConfig {
        epochs,
        ..TrainConfig::default()
    };
    let model = train(&data, &FeatureTemplate::default_set(), &cfg).map_err(|e| e.to_string())?;
    let tokens: Vec<&str> = sentence.split_whitespace().collect();
    if tokens.is_empty() {
        return Err("enter at least one token".into());
    }
    let s = Sentence::from_pairs(&tokens, &vec!["O"; tokens.len()]);
    let labels = predict(&model, std::slice::from_ref(&s)).remove(0);
    let spans = label_audit::corpus::extract_spans(&labels)
        .map_err(|e| e.to_string())?
        .into_iter()
        .map(|sp| (sp.start, sp.end, sp.entity_type))
        .collect();
    let out = Tagged {
        tokens: tokens.iter().map(|t| t.to_string()).collect(),
        labels,
        spans,
    };
    Ok(serde_json::to_string(&out).expect("serializable"))
}

fn tag_lines(text: &str) -> Vec<Vec<String>> {
    text.lines()
        .filter(|l| !l.trim().is_empty())
        .map(|l| l.split_whitespace().map(str::to_string).collect())
        .collect()
}

/// Span-exact scores for gold and predicted tags, one sentence per line.
pub fn score_tags(gold: &str, predicted: &str) -> Result<String, String> {
    let r = evaluate(&tag_lines(gold), &tag_lines(predicted)).map_err(|e| e.to_string())?;
    Ok(serde_json::json!({
        "precision": r.precision,
        "recall": r.recall,
        "f1": r.f1,
        "row": r.table_row(),
        "report": r.conlleval_report(),
    })
    .to_string())
}

/// A small identify run on a synthetic corpus with a corrupted test split.
pub fn synthetic_identify(train_sentences: usize, test_sentences: usize, fraction: f64, seed: u64) -> Result<String, String> {
    if !(30..=2000).contains(&train_sentences) || !(10..=600).contains(&test_sentences) {
        return Err("use 30-2000 training and 10-600 test sentences".into());
    }
    let types = vec!["LOC".to_string(), "ORG".to_string(), "PER".to_string()];
    let all = synthesize_corpus(&SynthConfig::new(train_sentences + test_sentences, 200, types, seed))
        .map_err(|e| e.to_string())?;
    let idx: Vec<usize> = (0..all.len()).collect();
    let train_set = all.select("train", &idx[..train_sentences]);
    let test = all.select("test", &idx[train_sentences..]);
    let spec = CorruptionSpec::new(fraction, CorruptionMode::TypePermutation, seed);
    let (test, corrupted) = corrupt_labels(&test, &spec).map_err(|e| e.to_string())?;
    let x = test.len().min(train_set.len() / 3);
    let mut settings = AuditSettings::default();
    settings.curve.train.epochs = 5;
    settings.checkpoints = Checkpoints::Count(6);
    settings.jobs = 1;
    let report = run_identify(&train_set, &test, x, &[seed, seed + 1], &settings).map_err(|e| e.to_string())?;
    let gaps: Vec<_> = report
        .gaps
        .iter()
        .map(|g| serde_json::json!({ "name": g.name, "early_mean": g.early_mean, "final_mean": g.final_mean }))
        .collect();
    Ok(serde_json::json!({
        "verdict": report.verdict.to_string(),
        "corrupted": corrupted.len(),
        "x": x,
        "gaps": gaps,
        "svg": render_svg(&plot_spec_from_report(&report)),
    })
    .to_string())
}

#[wasm_bindgen]
pub fn tag(train_conll: &str, sentence: &str, epochs: usize) -> Result<String, JsValue> {
    tag_sentence(train_conll, sentence, epochs).map_err(|e| JsValue::from_str(&e))
}

#[wasm_bindgen]
pub fn score(gold: &str, predicted: &str) -> Result<String, JsValue> {
    score_tags(gold, predicted).map_err(|e| JsValue::from_str(&e))
}

#[wasm_bindgen]
pub fn identify(train_sentences: usize, test_sentences: usize, fraction: f64, seed: u32) -> Result<String, JsValue> {
    synthetic_identify(train_sentences, test_sentences, fraction, seed as u64).map_err(|e| JsValue::from_str(&e))
}

/// CoNLL text of a small synthetic corpus, used to prefill the page.
#[wasm_bindgen]
pub fn sample_corpus(sentences: usize, seed: u32) -> Result<String, JsValue> {
    let types = vec!["LOC".to_string(), "ORG".to_string(), "PER".to_string()];
    synthesize_corpus(&SynthConfig::new(sentences, 60, types, seed as u64))
        .map(|d| label_audit::corpus::serialize_conll(&d))
        .map_err(|e| JsValue::from_str(&e.to_string()))
}
