//! Streaming fairness-aware feature selection.
//!
//! Features arrive one at a time over a fixed set of instances. Two
//! egocentric graphs — one around the label, one around a protected
//! attribute — partition the arrived features into strong-relevant (the
//! Markov blanket), redundant, and irrelevant sets via conditional-
//! independence tests (Fisher's z for continuous data, G² for categorical).
//! Set algebra over the two partitions then yields a selected subset that
//! trades accuracy against fairness, with replacement pools to recover
//! accuracy lost to excluded sex/race-linked features.
//!
//! Module map:
//! - [`ci`], [`stats`]: conditional-independence tests and the probability
//!   functions behind them;
//! - [`graph`]: the per-target streaming partition and redundancy map;
//! - [`select`]: derived sets (inadmissible, admissible, replacement pools)
//!   and the selection variants;
//! - [`engine`]: feeds one feature stream into both graphs;
//! - [`data`], [`synth`], [`census`], [`oracle`]: ingestion, synthetic
//!   ground-truth generators, and the exhaustive blanket oracle;
//! - [`eval`]: logistic-regression harness with accuracy, equalized-odds,
//!   and demographic-parity reporting.

pub mod census;
pub mod ci;
pub mod column;
pub mod data;
pub mod engine;
pub mod eval;
pub mod graph;
pub mod oracle;
pub mod select;
pub mod stats;
pub mod synth;

pub use census::generate_census;
pub use ci::{ci_test, fisher_z_test, g2_test, partial_correlation, CiError, CiResult, SignificanceConfig};
pub use column::{ColumnKind, FeatureColumn, FeatureId};
pub use data::{load_csv, stream, DataError, Dataset, StreamOrder};
pub use engine::StreamEngine;
pub use eval::{
    accuracy, benchmark, demographic_parity, equalized_odds, train_logistic, Aggregate,
    BenchmarkConfig, BenchmarkReport, EvalError, FairnessReport, TrainedModel, VariantOutcome,
};
pub use graph::{EgoGraph, GraphDump, GraphError};
pub use oracle::{brute_force_mb, OracleError};
pub use select::{SelectError, SelectOptions, SelectionSnapshot, SnapshotDump, Variant};
pub use synth::{generate_sem, GroundTruth, SemModel, SemSample, SyntheticSpec};
