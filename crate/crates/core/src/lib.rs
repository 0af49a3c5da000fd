//! Evaluation and ensembling toolkit for multilingual homophobia/transphobia
//! classification.
//!
//! The crate covers the post-inference half of a classification pipeline:
//!
//! - [`corpus`] — label schemas, dataset ingestion (CSV/TSV/JSON Lines) and
//!   label-distribution statistics
//! - [`metrics`] — confusion matrices, per-class precision/recall/F1,
//!   macro F1 and accuracy
//! - [`ensemble`] — per-model confidence distributions and dev-F1-weighted
//!   soft-vote combination
//! - [`prompting`] — few-shot prompt construction, chat-endpoint submission
//!   (live or replayed) and tagged-label response parsing
//! - [`report`] — distribution tables, results tables, confusion-matrix
//!   rendering and per-class error summaries

pub mod corpus;
pub mod ensemble;
pub mod metrics;
pub mod prompting;
pub mod report;

pub use corpus::{Dataset, DistributionStats, FileFormat, LabelSchema, LabeledExample, Split};
pub use ensemble::{EnsembleConfig, PredictionSet, WeightProvenance, WeightVector};
pub use metrics::{ConfusionMatrix, MetricsReport};
pub use prompting::{PromptConfig, PromptText, ReplayStore};
