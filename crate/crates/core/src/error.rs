use thiserror::Error;

/// Errors shared across the crate.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid node pair ({i}, {j}) for {n} nodes")]
    InvalidPair { i: usize, j: usize, n: usize },

    #[error("dimension mismatch in {context}: expected {expected}, got {got}")]
    DimensionMismatch {
        context: &'static str,
        expected: usize,
        got: usize,
    },

    #[error("{context}: non-finite value encountered")]
    NonFinite { context: &'static str },

    #[error("{context}: negative value encountered")]
    Negative { context: &'static str },

    #[error("matrix is not symmetric (max asymmetry {max_delta:e})")]
    NotSymmetric { max_delta: f64 },

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("unknown class label {label} (have {num_classes} classes)")]
    UnknownClass { label: usize, num_classes: usize },

    #[error("class {0} has no signals")]
    EmptyClass(usize),

    #[error("truth graph has no edges above the threshold; recall is undefined")]
    EmptyTruth,

    #[error("previous graph has zero norm; relative deviation is undefined")]
    ZeroBaseline,

    #[error("prices must be strictly positive (found {0})")]
    NonPositivePrice(f64),

    #[error("at least two time points are required for temporal differences")]
    TooFewTimePoints,

    #[error("cannot rewire: need {needed} absent pairs, only {available} available")]
    TooDense { needed: usize, available: usize },

    #[error("could not generate a connected graph after {0} attempts")]
    ConnectivityRetries(u32),

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),

    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;
