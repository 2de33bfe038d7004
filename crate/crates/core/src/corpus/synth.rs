//! Seeded synthetic NER corpora.
//!
//! Every sentence is built from a small grammar: lowercase filler words,
//! optional type-specific trigger words, and capitalized entity names drawn
//! from a per-type lexicon. The lexicon is the "codebook": a name always
//! carries the same entity type, so a consistent labeling function exists
//! and is learnable. Name strings carry no type cue of their own; a tagger
//! has to memorize names or rely on the trigger context.

use rand::distributions::{Distribution, WeightedIndex};
use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{CorpusError, Dataset, Sentence, Token};

const FILLER_SYLLABLES: [&str; 16] = [
    "ka", "lo", "mi", "tu", "re", "sa", "no", "vi", "de", "pa", "gu", "fe", "zo", "bi", "ha", "ru",
];
const NAME_SYLLABLES: [&str; 12] = [
    "Bar", "Cor", "Dal", "Eno", "Fin", "Gar", "Hol", "Ist", "Jun", "Kel", "Lom", "Mar",
];
const NAME_TAILS: [&str; 10] = ["an", "ex", "ia", "or", "um", "ed", "is", "ot", "ay", "uk"];
const TRIGGER_STEMS: [&str; 4] = ["near", "with", "about", "from"];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SynthConfig {
    pub n_sentences: usize,
    pub vocab_size: usize,
    pub entity_types: Vec<String>,
    pub seed: u64,
    /// Names per entity type; defaults to `vocab_size`.
    pub lexicon_per_type: Option<usize>,
    /// Probability that a mention is preceded by its type's trigger word.
    pub trigger_prob: f64,
    /// Probability that a mention spans two tokens.
    pub multi_token_prob: f64,
    /// Zipf exponent for name frequencies within a lexicon.
    pub name_zipf: f64,
}

impl SynthConfig {
    pub fn new(n_sentences: usize, vocab_size: usize, entity_types: Vec<String>, seed: u64) -> Self {
        SynthConfig {
            n_sentences,
            vocab_size,
            entity_types,
            seed,
            lexicon_per_type: None,
            trigger_prob: 0.6,
            multi_token_prob: 0.25,
            name_zipf: 0.7,
        }
    }

    fn validate(&self) -> Result<(), CorpusError> {
        let bad = |m: &str| Err(CorpusError::InvalidSynthesis(m.to_string()));
        if self.n_sentences < 1 {
            return bad("n_sentences must be at least 1");
        }
        if self.vocab_size < 10 {
            return bad("vocab_size must be at least 10");
        }
        if self.entity_types.is_empty() {
            return bad("at least one entity type is required");
        }
        if self
            .entity_types
            .iter()
            .any(|t| t.is_empty() || t.chars().any(char::is_whitespace))
        {
            return bad("entity types must be non-empty and contain no whitespace");
        }
        let mut sorted = self.entity_types.clone();
        sorted.sort();
        sorted.dedup();
        if sorted.len() != self.entity_types.len() {
            return bad("entity types must be distinct");
        }
        for (name, p) in [
            ("trigger_prob", self.trigger_prob),
            ("multi_token_prob", self.multi_token_prob),
        ] {
            if !(0.0..=1.0).contains(&p) {
                return Err(CorpusError::InvalidSynthesis(format!("{name} must be in [0,1]")));
            }
        }
        if !self.name_zipf.is_finite() || self.name_zipf < 0.0 {
            return bad("name_zipf must be finite and non-negative");
        }
        if self.lexicon_per_type == Some(0) {
            return bad("lexicon_per_type must be positive");
        }
        Ok(())
    }
}

/// Spells `index` with at least `min_digits` syllables (base = syllable count).
fn spell(index: usize, syllables: &[&str], min_digits: usize) -> String {
    let base = syllables.len();
    let mut digits = Vec::new();
    let mut n = index;
    while n > 0 || digits.len() < min_digits {
        digits.push(n % base);
        n /= base;
    }
    digits.iter().rev().map(|&d| syllables[d]).collect()
}

fn name(index: usize) -> String {
    let head = spell(index / NAME_TAILS.len(), &NAME_SYLLABLES, 1);
    let mut s = head.to_string();
    // only the first syllable keeps its capital
    let rest = s.split_off(NAME_SYLLABLES[0].len().min(s.len()));
    s.push_str(&rest.to_lowercase());
    s.push_str(NAME_TAILS[index % NAME_TAILS.len()]);
    s
}

struct Grammar {
    fillers: Vec<String>,
    triggers: Vec<String>,
    lexicons: Vec<Vec<String>>,
    name_weights: WeightedIndex<f64>,
}

impl Grammar {
    fn build(cfg: &SynthConfig, rng: &mut ChaCha8Rng) -> Grammar {
        let fillers = (0..cfg.vocab_size)
            .map(|i| spell(i, &FILLER_SYLLABLES, 2))
            .collect();
        let triggers = (0..cfg.entity_types.len())
            .map(|j| {
                let stem = TRIGGER_STEMS[j % TRIGGER_STEMS.len()];
                format!("{stem}{}", j / TRIGGER_STEMS.len())
            })
            .collect();
        let per_type = cfg.lexicon_per_type.unwrap_or(cfg.vocab_size);
        let mut pool: Vec<String> = (0..per_type * cfg.entity_types.len()).map(name).collect();
        pool.shuffle(rng);
        let lexicons = pool.chunks(per_type).map(|c| c.to_vec()).collect();
        let weights: Vec<f64> = (0..per_type)
            .map(|r| 1.0 / ((r + 1) as f64).powf(cfg.name_zipf))
            .collect();
        Grammar {
            fillers,
            triggers,
            lexicons,
            name_weights: WeightedIndex::new(weights).expect("positive weights"),
        }
    }

    fn filler(&self, rng: &mut ChaCha8Rng) -> String {
        // mild frequency skew: square a uniform draw
        let u: f64 = rng.gen();
        let idx = ((u * u) * self.fillers.len() as f64) as usize;
        self.fillers[idx.min(self.fillers.len() - 1)].clone()
    }
}

/// Generates a deterministic corpus from `cfg`; identical configs give
/// identical datasets.
pub fn synthesize_corpus(cfg: &SynthConfig) -> Result<Dataset, CorpusError> {
    cfg.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let grammar = Grammar::build(cfg, &mut rng);
    let mention_counts = WeightedIndex::new([0.15, 0.40, 0.30, 0.15]).expect("static weights");

    let sentences = (0..cfg.n_sentences)
        .map(|_| {
            let mut tokens = Vec::new();
            let mentions = mention_counts.sample(&mut rng);
            for _ in 0..mentions {
                for _ in 0..rng.gen_range(1..=3) {
                    tokens.push(Token::new(grammar.filler(&mut rng), "O"));
                }
                let ty = rng.gen_range(0..cfg.entity_types.len());
                let label = &cfg.entity_types[ty];
                if rng.gen_bool(cfg.trigger_prob) {
                    tokens.push(Token::new(grammar.triggers[ty].clone(), "O"));
                }
                let width = if rng.gen_bool(cfg.multi_token_prob) { 2 } else { 1 };
                for k in 0..width {
                    let lex = &grammar.lexicons[ty];
                    let word = lex[grammar.name_weights.sample(&mut rng)].clone();
                    let tag = if k == 0 { format!("B-{label}") } else { format!("I-{label}") };
                    tokens.push(Token::new(word, tag));
                }
            }
            for _ in 0..rng.gen_range(1..=4) {
                tokens.push(Token::new(grammar.filler(&mut rng), "O"));
            }
            tokens.push(Token::new(".", "O"));
            Sentence::new(tokens)
        })
        .collect();
    Dataset::new(format!("synthetic-{}", cfg.seed), sentences)
}
