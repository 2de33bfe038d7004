use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::TaggerError;
use crate::corpus::{Dataset, Sentence};

/// Observation feature extractors applied at every token position.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum FeatureTemplate {
    Word,
    LowerWord,
    Shape,
    Prefix(u8),
    Suffix(u8),
    PrevWord,
    NextWord,
    Bias,
}

impl FeatureTemplate {
    pub fn id(&self) -> String {
        match self {
            FeatureTemplate::Word => "w".into(),
            FeatureTemplate::LowerWord => "lw".into(),
            FeatureTemplate::Shape => "shape".into(),
            FeatureTemplate::Prefix(k) => format!("pre{k}"),
            FeatureTemplate::Suffix(k) => format!("suf{k}"),
            FeatureTemplate::PrevWord => "w-1".into(),
            FeatureTemplate::NextWord => "w+1".into(),
            FeatureTemplate::Bias => "bias".into(),
        }
    }

    /// The full template set: identity, lowercase, shape, 1-3 character
    /// affixes, neighbouring words, and a bias.
    pub fn default_set() -> Vec<FeatureTemplate> {
        use FeatureTemplate::*;
        vec![
            Word,
            LowerWord,
            Shape,
            Prefix(1),
            Prefix(2),
            Prefix(3),
            Suffix(1),
            Suffix(2),
            Suffix(3),
            PrevWord,
            NextWord,
            Bias,
        ]
    }

    /// Feature string produced at position `i`.
    pub fn extract(&self, words: &[&str], i: usize) -> String {
        let w = words[i];
        match *self {
            FeatureTemplate::Word => w.to_string(),
            FeatureTemplate::LowerWord => w.to_lowercase(),
            FeatureTemplate::Shape => shape(w),
            FeatureTemplate::Prefix(k) => w.chars().take(k as usize).collect(),
            FeatureTemplate::Suffix(k) => {
                let n = w.chars().count();
                w.chars().skip(n.saturating_sub(k as usize)).collect()
            }
            FeatureTemplate::PrevWord => {
                if i == 0 {
                    "<s>".into()
                } else {
                    words[i - 1].to_string()
                }
            }
            FeatureTemplate::NextWord => words.get(i + 1).map_or("</s>".into(), |s| s.to_string()),
            FeatureTemplate::Bias => String::new(),
        }
    }
}

impl fmt::Display for FeatureTemplate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.id())
    }
}

impl FromStr for FeatureTemplate {
    type Err = TaggerError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let affix = |rest: &str| -> Option<u8> {
            rest.parse::<u8>().ok().filter(|k| (1..=3).contains(k))
        };
        let t = match s {
            "w" => FeatureTemplate::Word,
            "lw" => FeatureTemplate::LowerWord,
            "shape" => FeatureTemplate::Shape,
            "w-1" => FeatureTemplate::PrevWord,
            "w+1" => FeatureTemplate::NextWord,
            "bias" => FeatureTemplate::Bias,
            _ => {
                if let Some(k) = s.strip_prefix("pre").and_then(affix) {
                    FeatureTemplate::Prefix(k)
                } else if let Some(k) = s.strip_prefix("suf").and_then(affix) {
                    FeatureTemplate::Suffix(k)
                } else {
                    return Err(TaggerError::UnknownTemplate(s.to_string()));
                }
            }
        };
        Ok(t)
    }
}

impl Serialize for FeatureTemplate {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.serialize_str(&self.id())
    }
}

impl<'de> Deserialize<'de> for FeatureTemplate {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// Collapsed character-class shape: `Xx`, `d`, `X.X`, ...
fn shape(w: &str) -> String {
    let mut out = String::new();
    let mut last = None;
    for c in w.chars() {
        let class = if c.is_uppercase() {
            'X'
        } else if c.is_lowercase() {
            'x'
        } else if c.is_numeric() {
            'd'
        } else {
            c
        };
        if last != Some(class) {
            out.push(class);
            last = Some(class);
        }
    }
    out
}

/// Observation attributes: `(template id, feature string)` pairs, indexed in
/// lexicographic order. Crossing with the label set gives emission weights.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureDictionary {
    templates: Vec<FeatureTemplate>,
    attributes: Vec<(String, String)>,
    index: HashMap<(String, String), u32>,
}

impl FeatureDictionary {
    pub fn from_attributes(
        templates: Vec<FeatureTemplate>,
        mut attributes: Vec<(String, String)>,
    ) -> Self {
        attributes.sort();
        attributes.dedup();
        let index = attributes
            .iter()
            .enumerate()
            .map(|(i, a)| (a.clone(), i as u32))
            .collect();
        FeatureDictionary {
            templates,
            attributes,
            index,
        }
    }

    pub fn templates(&self) -> &[FeatureTemplate] {
        &self.templates
    }

    pub fn attributes(&self) -> &[(String, String)] {
        &self.attributes
    }

    pub fn len(&self) -> usize {
        self.attributes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.attributes.is_empty()
    }

    pub fn lookup(&self, template_id: &str, value: &str) -> Option<u32> {
        // HashMap<(String,String)> cannot be queried by borrowed pairs
        self.index.get(&(template_id.to_string(), value.to_string())).copied()
    }

    /// Active attribute indices per position; unknown features are dropped.
    pub fn encode(&self, sentence: &Sentence) -> Vec<Vec<u32>> {
        let words = sentence.words();
        let ids: Vec<String> = self.templates.iter().map(FeatureTemplate::id).collect();
        let mut key = (String::new(), String::new());
        (0..words.len())
            .map(|i| {
                let mut active: Vec<u32> = self
                    .templates
                    .iter()
                    .zip(&ids)
                    .filter_map(|(t, id)| {
                        key.0.clone_from(id);
                        key.1 = t.extract(&words, i);
                        self.index.get(&key).copied()
                    })
                    .collect();
                active.sort_unstable();
                active.dedup();
                active
            })
            .collect()
    }
}

/// Collects every `(template, feature string)` pair occurring at least
/// `min_count` times in `dataset`. The bias attribute is exempt from the
/// cutoff.
pub fn build_features(
    dataset: &Dataset,
    templates: &[FeatureTemplate],
    min_count: usize,
) -> Result<FeatureDictionary, TaggerError> {
    build_features_from(dataset.sentences(), templates, min_count)
}

pub(crate) fn build_features_from(
    sentences: &[Sentence],
    templates: &[FeatureTemplate],
    min_count: usize,
) -> Result<FeatureDictionary, TaggerError> {
    if sentences.is_empty() {
        return Err(TaggerError::EmptyDataset);
    }
    let mut templates = templates.to_vec();
    templates.sort();
    templates.dedup();
    let ids: Vec<String> = templates.iter().map(FeatureTemplate::id).collect();
    let mut counts: BTreeMap<(String, String), usize> = BTreeMap::new();
    for sentence in sentences {
        let words = sentence.words();
        for i in 0..words.len() {
            for (t, id) in templates.iter().zip(&ids) {
                *counts.entry((id.clone(), t.extract(&words, i))).or_default() += 1;
            }
        }
    }
    let attributes = counts
        .into_iter()
        .filter(|((id, _), c)| *c >= min_count || id == "bias")
        .map(|(k, _)| k)
        .collect();
    Ok(FeatureDictionary::from_attributes(templates, attributes))
}
