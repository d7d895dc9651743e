use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

/// Coarse classification used by the CLI to pick an exit code.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorClass {
    /// Malformed or unreadable input.
    Input,
    /// A structural precondition of an operation was violated.
    Precondition,
    /// The computation ran but could not produce a usable number.
    Numerical,
}

impl ErrorClass {
    pub fn exit_code(self) -> i32 {
        match self {
            ErrorClass::Input => 2,
            ErrorClass::Precondition => 3,
            ErrorClass::Numerical => 4,
        }
    }
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("matrix must have at least one row and one column (got {rows}x{cols})")]
    EmptyMatrix { rows: usize, cols: usize },

    #[error("non-finite value at row {row}, column {col}")]
    NonFiniteInput { row: usize, col: usize },

    #[error("trial shapes differ: {first:?} vs {second:?}")]
    ShapeMismatch {
        first: (usize, usize),
        second: (usize, usize),
    },

    #[error("need at least {required} rows, got {actual}")]
    InsufficientRows { required: usize, actual: usize },

    #[error("need at least {required} columns, got {actual}")]
    InsufficientColumns { required: usize, actual: usize },

    #[error("feature axis has length {len}; unequal feature pairs need at least 2")]
    FeatureAxisTooSmall { len: usize },

    #[error("invalid weights: {0}")]
    InvalidWeights(String),

    #[error("only {positive} strictly positive weights; at least {required} are required")]
    DegenerateWeights { positive: usize, required: usize },

    #[error("matrix {rows}x{cols} exceeds the brute-force oracle cap of {max_rows}x{max_cols}")]
    MatrixTooLargeForOracle {
        rows: usize,
        cols: usize,
        max_rows: usize,
        max_cols: usize,
    },

    #[error("no center produced a valid local estimate (every ball had fewer than 4 points or a nonpositive denominator)")]
    AllBallsDegenerate,

    #[error("radii must be positive and sorted ascending")]
    InvalidRadii,

    #[error("invalid ball specification: {0}")]
    InvalidBall(String),

    #[error("points {first} and {second} coincide; nearest-neighbour distance is zero")]
    DuplicatePoints { first: usize, second: usize },

    #[error("mean self-kernel is zero; kernel moments are undefined")]
    DegenerateKernel,

    #[error("manifold {index} has {actual} rows, expected {expected}")]
    RowCountMismatch {
        index: usize,
        expected: usize,
        actual: usize,
    },

    #[error("alignment needs at least two manifolds, got {0}")]
    TooFewManifolds(usize),

    #[error("grid value {requested} exceeds the available {available} along {axis}")]
    GridExceedsData {
        axis: &'static str,
        requested: usize,
        available: usize,
    },

    #[error("nothing to plot: no valid records")]
    NoValidRecords,

    #[error("{path}: parse error at line {line}, field {field}: {message}")]
    Parse {
        path: PathBuf,
        line: usize,
        field: usize,
        message: String,
    },

    #[error("{path}: malformed binary data at byte offset {offset}: {message}")]
    ParseBinary {
        path: PathBuf,
        offset: u64,
        message: String,
    },

    #[error("{path}: non-finite entry at row {row}, column {col}")]
    NonFiniteEntry { path: PathBuf, row: usize, col: usize },

    #[error("{path}: expected a two-dimensional array, found {ndim} dimension(s)")]
    NotTwoDimensional { path: PathBuf, ndim: usize },

    #[error("{path}: unsupported format: {message}")]
    UnsupportedFormat { path: PathBuf, message: String },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("I/O error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub fn class(&self) -> ErrorClass {
        use Error::*;
        match self {
            Parse { .. }
            | ParseBinary { .. }
            | NonFiniteEntry { .. }
            | NotTwoDimensional { .. }
            | UnsupportedFormat { .. }
            | InvalidArgument(_)
            | Io { .. }
            | NonFiniteInput { .. }
            | InvalidWeights(_) => ErrorClass::Input,
            AllBallsDegenerate | DegenerateKernel | NoValidRecords => ErrorClass::Numerical,
            _ => ErrorClass::Precondition,
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
