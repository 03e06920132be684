use thiserror::Error;

/// Errors produced by the singular-system pipeline.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid precision context: {0}")]
    InvalidPrecision(String),

    #[error("precision exhausted: {0}")]
    PrecisionExhausted(String),

    #[error("no convergence: {0}")]
    NonConvergence(String),

    #[error("invalid bracket: {0}")]
    InvalidBracket(String),

    #[error("index {index} out of range 0..{bound}")]
    IndexOutOfRange { index: usize, bound: usize },

    #[error("lambda must be positive")]
    NonPositiveLambda,

    #[error("subset has {got} elements, expected {expected}")]
    WrongSubsetSize { got: usize, expected: usize },

    #[error("order n = {n} exceeds the subset enumeration cap {cap}")]
    EnumerationCap { n: usize, cap: usize },

    #[error("found {found} sign changes below z = {limit}, expected at least {expected}")]
    MissedRoot {
        found: usize,
        expected: usize,
        limit: f64,
    },

    #[error("boundary matrix is not singular (smallest pivot {pivot:e}, threshold {threshold:e})")]
    NotSingular { pivot: f64, threshold: f64 },

    #[error("boundary matrix has a nullspace of dimension at least two")]
    NullityTwo,

    #[error("eigenfunctions use mixed normalization conventions")]
    MixedConvention,

    #[error("unknown format `{0}`")]
    UnknownFormat(String),

    #[error("series order {got} exceeds cap {cap}")]
    OrderCap { got: usize, cap: usize },

    #[error("cut-off index {requested} exceeds the {available} available singular triples")]
    InsufficientSystem { requested: usize, available: usize },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("invalid data: {0}")]
    InvalidData(String),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// True for failures of an iterative numerical procedure.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::PrecisionExhausted(_)
                | Error::NonConvergence(_)
                | Error::MissedRoot { .. }
                | Error::NotSingular { .. }
                | Error::NullityTwo
        )
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
