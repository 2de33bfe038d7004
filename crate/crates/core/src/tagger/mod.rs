//! Linear-chain CRF tagger built from scratch: feature templates, exact
//! inference, the log-likelihood gradient, and AdaGrad training.

mod features;
mod inference;
mod model;
mod train;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use features::{build_features, FeatureDictionary, FeatureTemplate};
pub use inference::{backward, forward, forward_log_partition, marginals, viterbi, Marginals, Potentials};
pub use model::{label_set, CrfModel, MODEL_FORMAT, MODEL_VERSION};
pub use train::{predict, train, train_sentences, train_with_trace};

#[derive(Debug, Error)]
pub enum TaggerError {
    #[error("cannot train or build features on an empty dataset")]
    EmptyDataset,
    #[error("unknown feature template {0:?}")]
    UnknownTemplate(String),
    #[error("label {0:?} is not in the model's label set")]
    UnknownLabel(String),
    #[error("invalid training configuration: {0}")]
    InvalidConfig(String),
    #[error("non-finite objective at epoch {epoch}, sentence {sentence}")]
    NonFinite { epoch: usize, sentence: usize },
    #[error("model file: {0}")]
    ModelFormat(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

/// Optimizer and feature settings. Recorded in every trained model.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TrainConfig {
    pub epochs: usize,
    pub learning_rate: f64,
    pub l2: f64,
    pub epsilon: f64,
    pub seed: u64,
    pub shuffle: bool,
    /// Feature cutoff passed to [`build_features`].
    pub min_count: usize,
    /// One AdaGrad step per epoch on the exact full-corpus gradient.
    /// Diagnostic only; slow on real corpora.
    pub full_batch: bool,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            epochs: 10,
            learning_rate: 0.1,
            l2: 1e-4,
            epsilon: 1e-8,
            seed: 0,
            shuffle: true,
            min_count: 1,
            full_batch: false,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<(), TaggerError> {
        let bad = |m: &str| Err(TaggerError::InvalidConfig(m.to_string()));
        if self.epochs == 0 {
            return bad("epochs must be at least 1");
        }
        if !(self.learning_rate.is_finite() && self.learning_rate > 0.0) {
            return bad("learning_rate must be positive and finite");
        }
        if !(self.l2.is_finite() && self.l2 >= 0.0) {
            return bad("l2 must be non-negative and finite");
        }
        if !(self.epsilon.is_finite() && self.epsilon > 0.0) {
            return bad("epsilon must be positive and finite");
        }
        Ok(())
    }
}
