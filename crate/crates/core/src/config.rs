//! Run configuration shared by the CLI, reports and the acceptance suite.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::corpus::{ConllColumns, CorruptionMode, CorruptionSpec, SynthConfig};
use crate::protocol::{AuditSettings, Checkpoints, CurveMode, CurveSettings, ProtocolKind, ValidateSizes};
use crate::tagger::{FeatureTemplate, TrainConfig};

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read config {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("invalid config: {0}")]
    Parse(String),
    #[error("invalid config: {0}")]
    Invalid(String),
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Paths {
    pub train: Option<PathBuf>,
    pub test: Option<PathBuf>,
    pub test_good: Option<PathBuf>,
    pub test_mistake: Option<PathBuf>,
    pub test_corrected: Option<PathBuf>,
    pub out: Option<PathBuf>,
}

/// Subset sizes; unset sizes are derived from the dataset sizes.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Sizes {
    pub x: Option<usize>,
    pub y: Option<usize>,
    pub z: Option<usize>,
    pub w: Option<usize>,
}

impl Sizes {
    /// `x = min(|test|, floor(|train| / 3))` unless set.
    pub fn identify_x(&self, train: usize, test: usize) -> usize {
        self.x.unwrap_or_else(|| test.min(train / 3))
    }

    /// `y = |good|`, `z = |mistake|`, `x = min(y + z, floor(|train| / 3))`
    /// and `w = |train| - x - y` unless set.
    pub fn validate_sizes(&self, train: usize, good: usize, mistake: usize) -> ValidateSizes {
        let y = self.y.unwrap_or(good);
        let z = self.z.unwrap_or(mistake);
        let x = self.x.unwrap_or_else(|| (y + z).min(train / 3));
        let w = self.w.unwrap_or_else(|| train.saturating_sub(x + y));
        ValidateSizes { x, y, z, w }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Columns {
    pub token: usize,
    /// Tag column; the last column when unset.
    pub tag: Option<usize>,
}

impl From<Columns> for ConllColumns {
    fn from(c: Columns) -> Self {
        ConllColumns {
            token: c.token,
            tag: c.tag,
        }
    }
}

/// Parameters of `synth`: one corpus split into train and test, with a
/// corrupted copy of the test part.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SynthSection {
    pub train_sentences: usize,
    pub test_sentences: usize,
    pub vocab_size: usize,
    pub entity_types: Vec<String>,
    pub seed: u64,
    pub corruption_fraction: f64,
    pub corruption_mode: CorruptionMode,
    pub corruption_seed: u64,
}

impl Default for SynthSection {
    fn default() -> Self {
        SynthSection {
            train_sentences: 2000,
            test_sentences: 551,
            vocab_size: 200,
            entity_types: vec!["LOC".into(), "ORG".into(), "PER".into()],
            seed: 11,
            corruption_fraction: 0.267,
            corruption_mode: CorruptionMode::TypePermutation,
            corruption_seed: 5,
        }
    }
}

impl SynthSection {
    pub fn corpus_config(&self) -> SynthConfig {
        SynthConfig::new(
            self.train_sentences + self.test_sentences,
            self.vocab_size,
            self.entity_types.clone(),
            self.seed,
        )
    }

    pub fn corruption(&self) -> CorruptionSpec {
        CorruptionSpec::new(self.corruption_fraction, self.corruption_mode, self.corruption_seed)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub protocol: Option<ProtocolKind>,
    pub paths: Paths,
    pub columns: Columns,
    pub sizes: Sizes,
    pub seeds: Vec<u64>,
    pub checkpoints: Checkpoints,
    pub mode: CurveMode,
    /// Verdict threshold in F1 points.
    pub threshold: f64,
    pub early_fraction: f64,
    pub train: TrainConfig,
    pub templates: Vec<FeatureTemplate>,
    pub synth: SynthSection,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            protocol: None,
            paths: Paths::default(),
            columns: Columns::default(),
            sizes: Sizes::default(),
            seeds: vec![1, 2, 3, 4, 5],
            checkpoints: Checkpoints::default(),
            mode: CurveMode::Retrain,
            threshold: 2.0,
            early_fraction: 0.5,
            train: TrainConfig::default(),
            templates: FeatureTemplate::default_set(),
            synth: SynthSection::default(),
        }
    }
}

impl RunConfig {
    pub fn from_toml(text: &str) -> Result<RunConfig, ConfigError> {
        toml_parse(text)
    }

    pub fn load(path: &Path) -> Result<RunConfig, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        RunConfig::from_toml(&text)
    }

    /// The config as embedded in output artifacts. The output directory is
    /// left out so that artifacts do not depend on where they are written.
    pub fn to_json_value(&self) -> serde_json::Value {
        let mut embedded = self.clone();
        embedded.paths.out = None;
        serde_json::to_value(&embedded).expect("config serializes")
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        self.audit_settings(1)
            .curve
            .train
            .validate()
            .map_err(|e| ConfigError::Invalid(e.to_string()))?;
        if self.seeds.is_empty() {
            return Err(ConfigError::Invalid("at least one seed is required".into()));
        }
        if self.templates.is_empty() {
            return Err(ConfigError::Invalid("at least one feature template is required".into()));
        }
        Ok(())
    }

    pub fn audit_settings(&self, jobs: usize) -> AuditSettings {
        AuditSettings {
            curve: CurveSettings {
                train: self.train.clone(),
                templates: self.templates.clone(),
                mode: self.mode,
            },
            checkpoints: self.checkpoints.clone(),
            threshold: self.threshold,
            early_fraction: self.early_fraction,
            jobs,
        }
    }
}

#[cfg(feature = "cli")]
fn toml_parse(text: &str) -> Result<RunConfig, ConfigError> {
    toml::from_str(text).map_err(|e| ConfigError::Parse(e.to_string()))
}

#[cfg(not(feature = "cli"))]
fn toml_parse(_text: &str) -> Result<RunConfig, ConfigError> {
    Err(ConfigError::Parse("TOML support requires the `cli` feature".into()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_sizes() {
        let s = Sizes::default();
        assert_eq!(s.identify_x(1861, 551), 551);
        assert_eq!(Sizes { x: Some(550), ..s }.identify_x(1861, 551), 550);
        assert_eq!(s.identify_x(900, 551), 300);
        let v = s.validate_sizes(1861, 404, 147);
        assert_eq!(v, ValidateSizes { x: 551, y: 404, z: 147, w: 906 });
        let paper = Sizes {
            x: Some(550),
            w: Some(804),
            ..s
        };
        assert_eq!(
            paper.validate_sizes(1861, 404, 147),
            ValidateSizes { x: 550, y: 404, z: 147, w: 804 }
        );
    }

    #[cfg(feature = "cli")]
    #[test]
    fn toml_round_trip() {
        let text = r#"
            seeds = [3, 4]
            threshold = 1.5
            checkpoints = { sizes = [100, 200] }
            [sizes]
            x = 550
            [train]
            epochs = 4
            [paths]
            train = "data/train.conll"
        "#;
        let cfg = RunConfig::from_toml(text).unwrap();
        assert_eq!(cfg.seeds, vec![3, 4]);
        assert_eq!(cfg.sizes.x, Some(550));
        assert_eq!(cfg.train.epochs, 4);
        assert_eq!(cfg.train.learning_rate, TrainConfig::default().learning_rate);
        assert_eq!(cfg.checkpoints, Checkpoints::Sizes(vec![100, 200]));
        assert_eq!(cfg.paths.train.as_deref(), Some(Path::new("data/train.conll")));
        let back = RunConfig::from_toml(&toml::to_string(&cfg).unwrap()).unwrap();
        assert_eq!(back, cfg);
        assert!(RunConfig::from_toml("bogus = 1").is_err());
        assert_eq!(RunConfig::from_toml("checkpoints = 4").unwrap().checkpoints, Checkpoints::Count(4));
        assert_eq!(
            RunConfig::from_toml("checkpoints = [50, 90]").unwrap().checkpoints,
            Checkpoints::Sizes(vec![50, 90])
        );
    }
}
