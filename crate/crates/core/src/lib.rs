//! normprobe diagnoses what pretrained word-embedding tables encode about
//! grounded (perceptual) meaning by probing them against human semantic-norm
//! datasets.
//!
//! The library is organized as a pipeline:
//!
//! * [`ingest`] parses embedding files, norm datasets, WordNet, and
//!   information-content/frequency tables, and aligns them into the binary
//!   concept-by-feature label matrix everything downstream consumes.
//! * [`numerics`] is the self-contained numerical core: an L2-regularized
//!   logistic solver, truncated SVD, correlation/score statistics, seeded
//!   bootstrap resampling, and a nested-model F-test.
//! * [`featfit`] trains one probe per norm feature, selects the regularizer
//!   by leave-one-out cross-validation, and scores how well each feature is
//!   linearly decodable from the embeddings.
//! * [`conceptview`] compares similarity structure across representations:
//!   LSA concept vectors, pairwise similarity matrices under three metrics,
//!   per-concept cross-metric correlations, and a baseline-controlled F-test.
//! * [`domains`] clusters concepts into semantic domains under a hybrid
//!   LSA + feature-fit distance.
//! * [`selftest`] runs the self-contained oracle battery used by the CLI's
//!   `selftest` subcommand and by the acceptance suite.

pub mod conceptview;
pub mod domains;
mod error;
pub mod featfit;
pub mod ingest;
pub mod numerics;
pub mod selftest;

pub use error::{Error, Result};

/// Library version recorded in output manifests.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
