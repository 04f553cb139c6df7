use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("I/O error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("CSV parse error at row {row}: {message}")]
    Csv { row: usize, message: String },

    #[error("ragged row {row}: expected {expected} cells, found {found}")]
    RaggedRow {
        row: usize,
        expected: usize,
        found: usize,
    },

    #[error("label column `{0}` not found in header")]
    MissingLabel(String),

    #[error("empty input: {0}")]
    EmptyInput(String),

    #[error("label column has a single distinct value; at least two classes are required")]
    SingleClass,

    #[error("all rows were dropped during preprocessing")]
    AllRowsDropped,

    #[error("invalid dataset: {0}")]
    InvalidDataset(String),

    #[error("invalid tangent set: {0}")]
    InvalidTangents(String),

    #[error("linear solve failed after ridge jitter (dim {dim}, diag range [{min_diag:e}, {max_diag:e}])")]
    LinearSolve {
        dim: usize,
        min_diag: f64,
        max_diag: f64,
    },

    #[error("LP solver exceeded its iteration guard ({iterations} pivots)")]
    CyclingGuard { iterations: usize },

    #[error("LP too large for the dense solver: {rows} rows x {cols} columns")]
    DimensionOverflow { rows: usize, cols: usize },

    #[error("invalid LP: {0}")]
    InvalidLp(String),

    #[error("fit failed for class {class} on node with {active} active features: {source}")]
    NodeFit {
        class: usize,
        active: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("too many features for exhaustive enumeration: p = {p} exceeds the guard of {limit}")]
    TooManyFeatures { p: usize, limit: usize },

    #[error("unknown feature `{0}`")]
    UnknownFeature(String),

    #[error("duplicate feature `{0}`")]
    DuplicateFeature(String),

    #[error("invalid option: {0}")]
    InvalidOption(String),

    #[error("malformed report: {0}")]
    Report(String),

    #[error("LP file parse error at line {line}: {message}")]
    LpParse { line: usize, message: String },
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
