use std::path::PathBuf;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("cannot read {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
    #[error("row {row}: expected {expected} columns, found {found}")]
    RaggedRow {
        row: usize,
        expected: usize,
        found: usize,
    },
    #[error("row {row}, column {column}: cannot parse {value:?} as a number")]
    Parse {
        row: usize,
        column: usize,
        value: String,
    },
    #[error("label column {0} not found")]
    LabelColumn(String),
    #[error("empty dataset: {0}")]
    Empty(&'static str),
    #[error("invalid dataset: {0}")]
    InvalidDataset(String),
    #[error("feature {feature}: range override must be positive, got {value}")]
    InvalidOverride { feature: usize, value: f64 },
    #[error("index {index} out of range for {what} of size {size}")]
    IndexOutOfRange {
        what: &'static str,
        index: usize,
        size: usize,
    },
    #[error("k must be in 1..={n}, got {k}")]
    InvalidK { k: usize, n: usize },
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("invalid dissimilarity matrix: {0}")]
    InvalidMatrix(String),
    #[error("spanning tree needs at least 2 nodes, got {0}")]
    TooFewNodes(usize),
    #[error("part {0} is empty")]
    EmptyPart(usize),
    #[error("part {part}: feature {feature} has no observed values")]
    UnobservedCoordinate { part: usize, feature: usize },
    #[error("invalid partition: {0}")]
    InvalidPartition(String),
    #[error("dataset has missing values; k-means needs complete data")]
    MissingValues,
    #[error("length mismatch: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },
    #[error("dataset has no labels")]
    MissingLabels,
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("internal invariant violated: {0}")]
    Invariant(String),
}
