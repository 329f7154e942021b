use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, StadionError>;

/// Broad classification used by front ends to map failures to exit codes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorCategory {
    /// Bad parameters or configuration.
    Config,
    /// Unreadable, malformed or inconsistent input data.
    Data,
    /// A failure while running a computation on otherwise valid input.
    Runtime,
}

#[derive(Debug, Error)]
pub enum StadionError {
    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("csv error at row {row}: {message}")]
    Csv { row: usize, message: String },

    #[error("parse error at row {row}, column {column}: cannot read {value:?} as a number")]
    Parse {
        row: usize,
        column: usize,
        value: String,
    },

    #[error("ragged input at row {row}: expected {expected} fields, found {found}")]
    Ragged {
        row: usize,
        expected: usize,
        found: usize,
    },

    #[error("input contains no data rows")]
    Empty,

    #[error("label column {index} out of range for {columns} columns")]
    LabelColumnOutOfRange { index: usize, columns: usize },

    #[error("invalid dataset: {0}")]
    InvalidDataset(String),

    #[error("dataset is already standardized")]
    AlreadyStandardized,

    #[error("invalid generator spec: {0}")]
    InvalidGenerator(String),

    #[error("invalid partition: {0}")]
    InvalidPartition(String),

    #[error("length mismatch: {left} vs {right} samples")]
    LengthMismatch { left: usize, right: usize },

    #[error("contingency table {rows}x{cols} exceeds the cap of {cap}")]
    TableTooLarge {
        rows: usize,
        cols: usize,
        cap: usize,
    },

    #[error("invalid clusterer configuration: {0}")]
    InvalidConfig(String),

    #[error("cannot form {k} clusters from {n} samples")]
    TooManyClusters { k: usize, n: usize },

    #[error("cannot form {k} non-empty clusters: only {distinct} distinct points")]
    NotEnoughDistinctPoints { k: usize, distinct: usize },

    #[error("{0} has no extension operator")]
    NoExtensionOperator(&'static str),

    #[error("dimension mismatch: model has {expected} features, data has {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("dataset has {n} samples, above the configured cap of {cap}")]
    SampleCap { n: usize, cap: usize },

    #[error("noise amplitude must be non-negative, got {0}")]
    NegativeEpsilon(f64),

    #[error("invalid noise grid: {0}")]
    InvalidGrid(String),

    #[error("invalid stability parameters: {0}")]
    InvalidParams(String),

    #[error("validity index {index} requires at least 2 clusters")]
    SingleCluster { index: &'static str },

    #[error("validity index {index} is undefined for this partition: {reason}")]
    DegenerateIndex {
        index: &'static str,
        reason: &'static str,
    },

    #[error("benchmark input: {0}")]
    Benchmark(String),

    #[error("serialization failed: {0}")]
    Serialize(String),
}

impl StadionError {
    pub fn category(&self) -> ErrorCategory {
        use StadionError::*;
        match self {
            Io { .. }
            | Csv { .. }
            | Parse { .. }
            | Ragged { .. }
            | Empty
            | InvalidDataset(_)
            | AlreadyStandardized
            | LengthMismatch { .. }
            | DimensionMismatch { .. }
            | SampleCap { .. }
            | Benchmark(_) => ErrorCategory::Data,
            LabelColumnOutOfRange { .. }
            | InvalidGenerator(_)
            | InvalidConfig(_)
            | NegativeEpsilon(_)
            | InvalidGrid(_)
            | InvalidParams(_)
            | NoExtensionOperator(_) => ErrorCategory::Config,
            InvalidPartition(_)
            | TableTooLarge { .. }
            | TooManyClusters { .. }
            | NotEnoughDistinctPoints { .. }
            | SingleCluster { .. }
            | DegenerateIndex { .. }
            | Serialize(_) => ErrorCategory::Runtime,
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        StadionError::Io {
            path: path.into(),
            source,
        }
    }
}
