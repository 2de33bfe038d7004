//! Sequence-labeling corpora: tokens, BIO2 tags, entity spans, CoNLL I/O,
//! a seeded synthetic generator and label corruption.

mod conll;
mod corrupt;
mod synth;

use std::collections::BTreeSet;
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use conll::{parse_conll, serialize_conll, ConllColumns};
pub use corrupt::{corrupt_labels, CorruptionMode, CorruptionSpec};
pub use synth::{synthesize_corpus, SynthConfig};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum CorpusError {
    #[error("line {line}: expected at least {expected} columns, found {found}")]
    MissingColumns {
        line: usize,
        expected: usize,
        found: usize,
    },
    #[error("line {line}: malformed tag {tag:?}")]
    MalformedTagAtLine { line: usize, tag: String },
    #[error("position {position}: malformed tag {tag:?}")]
    MalformedTag { position: usize, tag: String },
    #[error("invalid BIO2 sequence at index {index}: {tag:?} does not continue an entity")]
    InvalidBio { index: usize, tag: String },
    #[error("invalid token {0:?}: token text must be non-empty and contain no whitespace")]
    InvalidToken(String),
    #[error("sentence {0} has no tokens")]
    EmptySentence(usize),
    #[error("invalid synthesis parameters: {0}")]
    InvalidSynthesis(String),
    #[error("invalid corruption spec: {0}")]
    InvalidCorruption(String),
    #[error("corruption requested {requested} sentences but only {achievable} are eligible")]
    TooFewEligible { requested: usize, achievable: usize },
}

/// A parsed BIO tag.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Tag<'a> {
    Outside,
    Begin(&'a str),
    Inside(&'a str),
}

impl<'a> Tag<'a> {
    /// Parses `O`, `B-TYPE` or `I-TYPE`; the type must be non-empty.
    pub fn parse(tag: &'a str) -> Option<Tag<'a>> {
        if tag == "O" {
            return Some(Tag::Outside);
        }
        let (prefix, ty) = (tag.get(..2)?, tag.get(2..)?);
        if ty.is_empty() || ty.chars().any(char::is_whitespace) {
            return None;
        }
        match prefix {
            "B-" => Some(Tag::Begin(ty)),
            "I-" => Some(Tag::Inside(ty)),
            _ => None,
        }
    }

    pub fn entity_type(&self) -> Option<&'a str> {
        match *self {
            Tag::Outside => None,
            Tag::Begin(t) | Tag::Inside(t) => Some(t),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Token {
    pub text: String,
    pub label: String,
}

impl Token {
    pub fn new(text: impl Into<String>, label: impl Into<String>) -> Self {
        Token {
            text: text.into(),
            label: label.into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Sentence {
    pub tokens: Vec<Token>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub doc_id: Option<String>,
}

impl Sentence {
    pub fn new(tokens: Vec<Token>) -> Self {
        Sentence {
            tokens,
            doc_id: None,
        }
    }

    /// Builds a sentence from parallel word and tag slices.
    pub fn from_pairs<W: AsRef<str>, L: AsRef<str>>(words: &[W], labels: &[L]) -> Self {
        assert_eq!(words.len(), labels.len(), "words and labels must align");
        Sentence::new(
            words
                .iter()
                .zip(labels)
                .map(|(w, l)| Token::new(w.as_ref(), l.as_ref()))
                .collect(),
        )
    }

    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }

    pub fn words(&self) -> Vec<&str> {
        self.tokens.iter().map(|t| t.text.as_str()).collect()
    }

    pub fn labels(&self) -> Vec<String> {
        self.tokens.iter().map(|t| t.label.clone()).collect()
    }

    pub fn spans(&self) -> Result<Vec<Span>, CorpusError> {
        extract_spans(&self.labels())
    }

    /// Same token texts in the same order (labels may differ).
    pub fn same_text(&self, other: &Sentence) -> bool {
        self.tokens.len() == other.tokens.len()
            && self
                .tokens
                .iter()
                .zip(&other.tokens)
                .all(|(a, b)| a.text == b.text)
    }
}

/// A typed entity span over token indices `[start, end)`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Span {
    pub start: usize,
    pub end: usize,
    pub entity_type: String,
}

impl Span {
    pub fn new(start: usize, end: usize, entity_type: impl Into<String>) -> Self {
        Span {
            start,
            end,
            entity_type: entity_type.into(),
        }
    }
}

impl fmt::Display for Span {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{},{})", self.start, self.end, self.entity_type)
    }
}

/// An ordered collection of BIO2-valid sentences.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Dataset {
    pub name: String,
    sentences: Vec<Sentence>,
    label_alphabet: BTreeSet<String>,
}

impl Dataset {
    /// Validates every sentence and derives the entity-type alphabet.
    pub fn new(name: impl Into<String>, sentences: Vec<Sentence>) -> Result<Self, CorpusError> {
        let mut alphabet = BTreeSet::new();
        for (i, s) in sentences.iter().enumerate() {
            if s.is_empty() {
                return Err(CorpusError::EmptySentence(i));
            }
            for tok in &s.tokens {
                if tok.text.is_empty() || tok.text.chars().any(char::is_whitespace) {
                    return Err(CorpusError::InvalidToken(tok.text.clone()));
                }
            }
            validate_bio2(&s.labels())?;
            for tok in &s.tokens {
                if let Some(Tag::Begin(t)) = Tag::parse(&tok.label) {
                    alphabet.insert(t.to_string());
                }
            }
        }
        Ok(Dataset {
            name: name.into(),
            sentences,
            label_alphabet: alphabet,
        })
    }

    pub fn empty(name: impl Into<String>) -> Self {
        Dataset {
            name: name.into(),
            sentences: Vec::new(),
            label_alphabet: BTreeSet::new(),
        }
    }

    pub fn sentences(&self) -> &[Sentence] {
        &self.sentences
    }

    pub fn label_alphabet(&self) -> &BTreeSet<String> {
        &self.label_alphabet
    }

    pub fn len(&self) -> usize {
        self.sentences.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sentences.is_empty()
    }

    pub fn token_count(&self) -> usize {
        self.sentences.iter().map(Sentence::len).sum()
    }

    /// New dataset holding the sentences at `indices`, in that order.
    pub fn select(&self, name: impl Into<String>, indices: &[usize]) -> Dataset {
        let sentences: Vec<Sentence> = indices.iter().map(|&i| self.sentences[i].clone()).collect();
        Dataset::from_valid(name, sentences)
    }

    pub(crate) fn from_valid(name: impl Into<String>, sentences: Vec<Sentence>) -> Dataset {
        let mut alphabet = BTreeSet::new();
        for s in &sentences {
            for tok in &s.tokens {
                if let Some(Tag::Begin(t)) = Tag::parse(&tok.label) {
                    alphabet.insert(t.to_string());
                }
            }
        }
        Dataset {
            name: name.into(),
            sentences,
            label_alphabet: alphabet,
        }
    }

    pub fn into_sentences(self) -> Vec<Sentence> {
        self.sentences
    }
}

/// Rewrites IOB1 (or mixed) tags into BIO2: an `I-T` that opens an entity
/// becomes `B-T`; everything else is kept.
pub fn normalize_iob1<S: AsRef<str>>(labels: &[S]) -> Result<Vec<String>, CorpusError> {
    let mut out = Vec::with_capacity(labels.len());
    let mut prev: Option<&str> = None;
    for (position, raw) in labels.iter().enumerate() {
        let raw = raw.as_ref();
        let tag = Tag::parse(raw).ok_or_else(|| CorpusError::MalformedTag {
            position,
            tag: raw.to_string(),
        })?;
        match tag {
            Tag::Inside(t) if prev != Some(t) => out.push(format!("B-{t}")),
            _ => out.push(raw.to_string()),
        }
        prev = tag.entity_type();
    }
    Ok(out)
}

/// Checks BIO2 validity, reporting the first offending index.
pub fn validate_bio2<S: AsRef<str>>(labels: &[S]) -> Result<(), CorpusError> {
    let mut prev: Option<&str> = None;
    for (index, raw) in labels.iter().enumerate() {
        let raw = raw.as_ref();
        let tag = Tag::parse(raw).ok_or_else(|| CorpusError::MalformedTag {
            position: index,
            tag: raw.to_string(),
        })?;
        if let Tag::Inside(t) = tag {
            if prev != Some(t) {
                return Err(CorpusError::InvalidBio {
                    index,
                    tag: raw.to_string(),
                });
            }
        }
        prev = tag.entity_type();
    }
    Ok(())
}

/// One span per maximal `B-T (I-T)*` run, sorted by start.
pub fn extract_spans<S: AsRef<str>>(labels: &[S]) -> Result<Vec<Span>, CorpusError> {
    validate_bio2(labels)?;
    let mut spans = Vec::new();
    let mut open: Option<(usize, &str)> = None;
    for (i, raw) in labels.iter().enumerate() {
        // validated above
        let tag = Tag::parse(raw.as_ref()).expect("validated tag");
        match tag {
            Tag::Inside(_) => {}
            Tag::Begin(t) => {
                if let Some((start, ty)) = open.take() {
                    spans.push(Span::new(start, i, ty));
                }
                open = Some((i, t));
            }
            Tag::Outside => {
                if let Some((start, ty)) = open.take() {
                    spans.push(Span::new(start, i, ty));
                }
            }
        }
    }
    if let Some((start, ty)) = open {
        spans.push(Span::new(start, labels.len(), ty));
    }
    Ok(spans)
}

/// Renders spans back to a BIO2 sequence of length `len`.
pub fn render_spans(spans: &[Span], len: usize) -> Vec<String> {
    let mut out = vec!["O".to_string(); len];
    for span in spans {
        for (offset, slot) in out[span.start..span.end].iter_mut().enumerate() {
            *slot = if offset == 0 {
                format!("B-{}", span.entity_type)
            } else {
                format!("I-{}", span.entity_type)
            };
        }
    }
    out
}

/// Rewrites illegal `I-T` tags (sentence-initial, after `O`, or after a
/// different type) to `B-T`. Malformed tags are left untouched.
pub fn repair_bio2(labels: &mut [String]) {
    let mut prev: Option<String> = None;
    for label in labels.iter_mut() {
        let parsed = Tag::parse(label).map(|t| match t {
            Tag::Outside => (None, false),
            Tag::Begin(ty) => (Some(ty.to_string()), false),
            Tag::Inside(ty) => (Some(ty.to_string()), prev.as_deref() != Some(ty)),
        });
        match parsed {
            Some((ty, needs_fix)) => {
                if needs_fix {
                    *label = format!("B-{}", ty.as_deref().unwrap_or_default());
                }
                prev = ty;
            }
            None => prev = None,
        }
    }
}
