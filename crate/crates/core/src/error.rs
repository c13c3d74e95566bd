use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid B-spline basis: order {order}, basis count {num_basis} (need 1 <= order <= basis count)")]
    InvalidBasis { order: usize, num_basis: usize },

    #[error("evaluation point {0} is outside [0, 1]")]
    OutOfDomain(f64),

    #[error("need at least 2 sample points, got {0}")]
    TooFewSamples(usize),

    #[error("length mismatch: expected {expected}, got {actual}")]
    LengthMismatch { expected: usize, actual: usize },

    #[error("class histogram is empty")]
    EmptyHistogram,

    #[error("training set is empty")]
    EmptyTrainingSet,

    #[error("row subset is empty")]
    EmptySubset,

    #[error("label {label} is outside 1..={n_classes}")]
    InvalidLabel { label: usize, n_classes: usize },

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("need at least {needed} curves, got {got}")]
    TooFewCurves { needed: usize, got: usize },

    #[error("curves are sampled on different grids ({0} vs {1} points)")]
    GridMismatch(usize, usize),

    #[error("ensemble has no spline representations")]
    NoSplineRepresentation,

    #[error("invalid dataset: {0}")]
    InvalidDataset(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("line {line}: expected {expected} values, found {found}")]
    RaggedRow { line: usize, expected: usize, found: usize },

    #[error("line {line}, field {field}: cannot parse {token:?}")]
    Parse { line: usize, field: usize, token: String },

    #[error("line {line}, field {field}: non-finite value {token:?}")]
    NonFinite { line: usize, field: usize, token: String },

    #[error("ensemble file: {0}")]
    Format(String),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
