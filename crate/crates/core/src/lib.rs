//! Cyclic-boosted additive models with grouped feature importance.
//!
//! The crate trains binary classifiers of the form
//! `logit P(y=1|x) = intercept + sum_i f_i(x_i) + sum_(i,j) f_ij(x_i, x_j)`
//! where every `f` is a per-bin lookup table over quantile bins, and then
//! answers "how important is this *set* of features" by averaging the absolute
//! summed contribution of the set over a dataset. Everything downstream of a
//! seed is deterministic: generated data, train/validation splits, fold
//! assignments and permutations reproduce bit-for-bit across runs and worker
//! counts.
//!
//! Module map:
//! * [`data`] — datasets, feature groups, CSV and group-file loading
//! * [`binning`] — weighted quantile binning of numeric columns
//! * [`model`] — the fitted model, prediction, JSON persistence
//! * [`train`] — cyclic gradient boosting and pair purification
//! * [`importance`] — individual and grouped importance, reports
//! * [`baselines`] — grouped permutation importance, greedy forward selection
//! * [`synthetic`] — seeded generators for two-feature stress datasets
//! * [`evaluation`] — metrics, subject-aware cross-validation, curves
//! * [`bench`] — wall-clock comparison and scaling probes
//!
//! The `parallel` feature (on by default) runs sample-level reductions, cross
//! validation folds, permutation repeats and sweep points on a rayon pool;
//! disabling it falls back to sequential loops with bit-identical results.

pub mod baselines;
pub mod bench;
pub mod binning;
pub mod data;
pub mod error;
pub mod evaluation;
mod exec;
pub mod importance;
pub mod model;
pub mod rng;
pub mod synthetic;
pub mod train;

pub use data::{load_csv, load_groups, Dataset, FeatureGroup};
pub use error::Error;
pub use exec::ExecMode;
pub use model::GamModel;
pub use train::{train, TrainConfig};

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;
