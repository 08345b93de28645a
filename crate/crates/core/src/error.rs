use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("failed to read {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("line {line}: {message}")]
    Parse { line: u64, message: String },

    #[error("incomplete matrix: no value for occasion {occasion:?}, from {from:?} to {to:?}")]
    IncompleteMatrix {
        occasion: String,
        from: String,
        to: String,
    },

    #[error("line {line}: duplicate entry for occasion {occasion:?}, from {from:?} to {to:?}")]
    DuplicateEntry {
        line: u64,
        occasion: String,
        from: String,
        to: String,
    },

    #[error("invalid JSON dataset: {0}")]
    Json(#[from] serde_json::Error),

    #[error("shape mismatch: {0}")]
    Shape(String),

    #[error("non-finite value at occasion {occasion}, row {row}, column {col}")]
    NonFinite { occasion: usize, row: usize, col: usize },

    #[error("dataset declared symmetric but occasion {occasion:?} differs at ({from:?}, {to:?})")]
    NotSymmetric {
        occasion: String,
        from: String,
        to: String,
    },

    #[error("value {value} exceeds similarity maximum {max}")]
    SimilarityRange { value: f64, max: f64 },

    #[error("cannot raise negative value {value} to non-integer power {power}")]
    PowerDomain { value: f64, power: f64 },

    #[error("invalid power {0}: must be positive and finite")]
    InvalidPower(f64),

    #[error("insufficient observations: need at least 2 rows, got {0}")]
    InsufficientObservations(usize),

    #[error("matrix is not symmetric: |S[{row}][{col}] - S[{col}][{row}]| = {diff:e}")]
    AsymmetricInput { row: usize, col: usize, diff: f64 },

    #[error("degenerate configuration: data matrix has zero total variance")]
    DegenerateConfiguration,

    #[error("invalid dimension count {dims}: must be in 1..={max}")]
    InvalidDims { dims: usize, max: usize },

    #[error("all eigenvalues are zero; goodness of fit is undefined")]
    ZeroSpectrum,

    #[error("no asymmetry defined for a symmetric arrangement")]
    NoAsymmetry,

    #[error("zero variance in {0}; correlation is undefined")]
    ZeroVariance(&'static str),

    #[error("covariate has {got} values, expected {expected}")]
    CovariateLength { got: usize, expected: usize },

    #[error("k = {k} out of range 1..={n}")]
    KOutOfRange { k: usize, n: usize },

    #[error("k_max = {k_max} out of range {min}..={max}")]
    KMaxOutOfRange { k_max: usize, min: usize, max: usize },

    #[error("duplicate archetypoid index {0}")]
    DuplicateIndex(usize),

    #[error("index {index} out of range for {n} rows")]
    IndexOutOfRange { index: usize, n: usize },

    #[error("curve needs at least 3 points, got {0}")]
    CurveTooShort(usize),

    #[error("instance too large for exhaustive search: C({n}, {k}) = {count} > {limit}")]
    TooLarge {
        n: usize,
        k: usize,
        count: u128,
        limit: u128,
    },
}
