//! Crate-wide error type.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("cannot read '{path}': {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },

    #[error("cannot write '{path}': {source}")]
    Write {
        path: String,
        #[source]
        source: std::io::Error,
    },

    #[error("csv error in '{path}': {source}")]
    Csv {
        path: String,
        #[source]
        source: csv::Error,
    },

    #[error("column '{0}' not found")]
    MissingColumn(String),

    #[error("duplicate column '{0}'")]
    DuplicateColumn(String),

    #[error("invalid feature name '{0}'")]
    InvalidFeatureName(String),

    #[error("target not binary: value '{value}' at row {row}")]
    TargetNotBinary { value: String, row: usize },

    #[error("negative weight {value} at row {row}")]
    NegativeWeight { value: f64, row: usize },

    #[error("weight at row {row} is not a finite number")]
    InvalidWeight { row: usize },

    #[error("column '{0}' is not numeric; categorical features are not supported")]
    CategoricalColumn(String),

    #[error("dataset has no rows")]
    EmptyDataset,

    #[error("{what} has length {got}, expected {expected}")]
    LengthMismatch {
        what: String,
        expected: usize,
        got: usize,
    },

    #[error("unknown feature '{0}'")]
    UnknownFeature(String),

    #[error("unknown feature '{feature}' in group '{group}'")]
    UnknownGroupMember { group: String, feature: String },

    #[error("duplicate member '{feature}' in group '{group}'")]
    DuplicateGroupMember { group: String, feature: String },

    #[error("duplicate group name '{0}'")]
    DuplicateGroupName(String),

    #[error("group file '{path}': {detail}")]
    GroupFormat { path: String, detail: String },

    #[error("feature '{0}' has no finite values")]
    NoFiniteValues(String),

    #[error("single-class target")]
    SingleClassTarget,

    #[error("non-finite training loss at round {round}")]
    NanLoss { round: usize },

    #[error("sample is missing feature '{0}'")]
    MissingSampleFeature(String),

    #[error("model file '{path}': {detail}")]
    ModelFormat { path: String, detail: String },

    #[error("group '{0}' is empty")]
    EmptyGroup(String),

    #[error("metric undefined: labels contain a single class")]
    SingleClassMetric,

    #[error("cannot split {available} {unit} into {k} folds")]
    BadFoldCount {
        k: usize,
        available: usize,
        unit: &'static str,
    },

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
}

impl Error {
    /// Attach a feature name to errors raised by code that only sees a bare
    /// column (e.g. `fit_bins`).
    pub(crate) fn with_feature(self, name: &str) -> Self {
        match self {
            Error::NoFiniteValues(_) => Error::NoFiniteValues(name.to_string()),
            other => other,
        }
    }

    pub(crate) fn io(path: &std::path::Path, source: std::io::Error) -> Self {
        Error::Io {
            path: path.display().to_string(),
            source,
        }
    }

    pub(crate) fn write(path: &std::path::Path, source: std::io::Error) -> Self {
        Error::Write {
            path: path.display().to_string(),
            source,
        }
    }
}
