use std::path::PathBuf;

use thiserror::Error;

/// Errors produced by the clustering library.
#[derive(Debug, Error)]
pub enum NsError {
    #[error("file not found: {}", .0.display())]
    MissingFile(PathBuf),

    #[error("I/O error on {}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    /// Non-numeric or malformed cell; `row` is the 0-based data row (header excluded),
    /// `col` the 0-based column in the file.
    #[error("parse error at row {row}, column {col}: {msg}")]
    ParseError { row: usize, col: usize, msg: String },

    #[error("dataset has no rows")]
    EmptyDataset,

    #[error("invalid dataset: {0}")]
    InvalidDataset(String),

    #[error("invalid scatter spec: {0}")]
    InvalidSpec(String),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("index {index} out of range for {len} points")]
    IndexOutOfRange { index: usize, len: usize },

    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),

    #[error("degenerate membership weights for point {0}")]
    DegenerateWeights(usize),

    #[error("need more points than clusters (n = {n}, k = {k})")]
    TooFewPoints { n: usize, k: usize },

    #[error("cost became non-finite at iteration {iteration}")]
    NonFinite { iteration: usize },

    #[error("label vectors differ in length ({pred} vs {truth})")]
    LengthMismatch { pred: usize, truth: usize },

    #[error("label column required")]
    MissingLabels,

    #[error("column not found: {0}")]
    MissingColumn(String),
}

pub type Result<T> = std::result::Result<T, NsError>;
