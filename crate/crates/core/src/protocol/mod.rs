//! The two curriculum audit protocols.
//!
//! *Identify* samples three disjoint training subsets of size `x`: one
//! becomes a new test set, the others are combined with the original test
//! set into three ordered curricula (`TrainTest`, `PureTrain`, `TestTrain`).
//! If the test set follows the training labeling conventions, a prefix of
//! `TestTrain` predicts the new test set as well as a prefix of `PureTrain`.
//!
//! *Validate* splits an audited test set into a good part (`y` sentences)
//! and a corrected part (`z` sentences, available both as the original
//! mistakes and as the corrections), samples training subsets of sizes
//! `x`, `y` and `w`, and compares eight curricula that place the mistake or
//! corrected block at different positions.
//!
//! Each learning-curve point retrains a fresh model on a prefix of the
//! ordered curriculum (or, in continual mode, keeps training the previous
//! checkpoint's model on the newly added sentences).

mod audit;
mod curve;
mod plan;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::corpus::{Dataset, Sentence};
use crate::eval::EvalError;
use crate::tagger::TaggerError;

pub use audit::{
    compute_gaps, identify_pairs, recompute_verdict, run_identify, run_validate, validate_pairs,
    AuditReport, AuditSettings, GapPoint, GapSeries, PlanRecord, ProtocolKind, Verdict,
    VerdictRule, REPORT_SCHEMA_VERSION,
};
pub use curve::{job_seed, run_curve, Checkpoints, CurveMode, CurvePoint, CurveSettings, LearningCurve};
pub use plan::{
    build_identify_curricula, build_validate_curricula, make_identify_plan, make_validate_plan,
    IdentifyPlan, ValidatePlan, ValidateSizes,
};

#[derive(Debug, Error)]
pub enum ProtocolError {
    #[error("3*x = {needed} exceeds the training set size {available}; the largest feasible x is {max_x}")]
    InfeasibleIdentify {
        needed: usize,
        available: usize,
        max_x: usize,
    },
    #[error("x + y + w = {needed} exceeds the training set size {available}")]
    InfeasibleValidate { needed: usize, available: usize },
    #[error("{set} has {found} sentences, expected {expected}")]
    SizeMismatch {
        set: &'static str,
        expected: usize,
        found: usize,
    },
    #[error("mistake and corrected sets are misaligned at sentence {index}")]
    Misaligned { index: usize },
    #[error("invalid checkpoints: {0}")]
    Checkpoints(String),
    #[error("invalid settings: {0}")]
    Settings(String),
    #[error("missing data source {0:?}")]
    MissingSource(SourceId),
    #[error(transparent)]
    Tagger(#[from] TaggerError),
    #[error(transparent)]
    Eval(#[from] EvalError),
}

impl ProtocolError {
    /// True for numeric failures inside training.
    pub fn is_numeric(&self) -> bool {
        matches!(self, ProtocolError::Tagger(TaggerError::NonFinite { .. }))
    }
}

/// Which dataset a curriculum segment draws from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SourceId {
    Train,
    Test,
    TestGood,
    TestMistake,
    TestCorrected,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Segment {
    pub label: String,
    pub source: SourceId,
    pub indices: Vec<usize>,
}

/// An ordered training set built by concatenating segments.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Curriculum {
    pub name: String,
    /// Curricula sharing a group share per-checkpoint training seeds.
    pub seed_group: String,
    pub segments: Vec<Segment>,
}

impl Curriculum {
    pub fn len(&self) -> usize {
        self.segments.iter().map(|s| s.indices.len()).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Cumulative sentence count at the end of each segment.
    pub fn segment_ends(&self) -> Vec<usize> {
        self.segments
            .iter()
            .scan(0, |acc, s| {
                *acc += s.indices.len();
                Some(*acc)
            })
            .collect()
    }

    /// The curriculum's sentences in feeding order.
    pub fn materialize(&self, sources: &Sources<'_>) -> Result<Vec<Sentence>, ProtocolError> {
        let mut out = Vec::with_capacity(self.len());
        for seg in &self.segments {
            let ds = sources.get(seg.source)?;
            out.extend(seg.indices.iter().map(|&i| ds.sentences()[i].clone()));
        }
        Ok(out)
    }
}

/// Borrowed datasets a curriculum can reference.
#[derive(Debug, Clone, Copy, Default)]
pub struct Sources<'a> {
    pub train: Option<&'a Dataset>,
    pub test: Option<&'a Dataset>,
    pub test_good: Option<&'a Dataset>,
    pub test_mistake: Option<&'a Dataset>,
    pub test_corrected: Option<&'a Dataset>,
}

impl<'a> Sources<'a> {
    pub fn get(&self, id: SourceId) -> Result<&'a Dataset, ProtocolError> {
        let found = match id {
            SourceId::Train => self.train,
            SourceId::Test => self.test,
            SourceId::TestGood => self.test_good,
            SourceId::TestMistake => self.test_mistake,
            SourceId::TestCorrected => self.test_corrected,
        };
        found.ok_or(ProtocolError::MissingSource(id))
    }
}
