//! Self-contained numerical core: convex logistic solver, truncated SVD,
//! correlation and score statistics, seeded bootstrap resampling, and the
//! nested-model F-test. Everything here is deterministic and pure; callers
//! may invoke concurrently on shared read-only inputs.

mod bootstrap;
mod linreg;
mod logistic;
pub mod special;
mod stats;
mod svd;

pub use bootstrap::{bootstrap_median_diff, ConfidenceInterval};
pub use linreg::{nested_f_test, ols_fit, FTestResult, OlsFit};
pub use logistic::{
    design_from_rows, fit_logistic, fit_logistic_weighted, fit_logistic_with, sigmoid, softplus,
    LogisticModel, LogisticObjective, LogisticOptions,
};
pub use stats::{binary_f1, cosine_sim, median, pearson, quantile_sorted};
pub use svd::{truncated_svd, TruncatedSvd};
