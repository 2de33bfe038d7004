//! Label-consistency auditing for sequence-labeling corpora.
//!
//! Two subsets of an annotated corpus that follow the same labeling
//! conventions should be equally predictive of held-out data. This crate
//! trains a linear-chain CRF on ordered training curricula (for example
//! "training data, then the test set" versus "test set, then training data")
//! and compares the resulting learning curves:
//!
//! * [`protocol::run_identify`] checks whether a test set is consistent with
//!   the training set it is meant to evaluate.
//! * [`protocol::run_validate`] checks that a corrected subset has recovered
//!   consistency while the original mistakes still hurt.
//!
//! Supporting modules: [`corpus`] (CoNLL I/O, BIO2 spans, synthetic data,
//! corruption), [`tagger`] (the CRF), [`eval`] (span-exact P/R/F1),
//! [`report`] (CSV and SVG output), and [`config`] (run configuration).

pub mod config;
pub mod corpus;
pub mod eval;
pub mod io;
pub mod protocol;
pub mod report;
pub mod tagger;

#[cfg(feature = "cli")]
pub mod cli;

pub const VERSION: &str = env!("CARGO_PKG_VERSION");
