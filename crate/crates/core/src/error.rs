use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),
    #[error("coordinate {value} out of domain [{lower}, {upper}] in dimension {dim}")]
    OutOfDomain { dim: usize, value: f64, lower: f64, upper: f64 },
    #[error("state space has too many states to enumerate")]
    TooManyStates,
    #[error("trace is empty after removing {burn_in} burn-in draws")]
    EmptyTrace { burn_in: usize },
    #[error("shape mismatch: expected {expected}, got {got}")]
    Shape { expected: usize, got: usize },
    #[error("invalid transition matrix: {0}")]
    InvalidTransitionMatrix(String),
    #[error("no unique stationary distribution (residual {residual:e})")]
    NoUniqueStationary { residual: f64 },
    #[error("series has zero variance")]
    DegenerateVariance,
    #[error("series of length {len} too short for lag {max_lag}")]
    SeriesTooShort { len: usize, max_lag: usize },
    #[error("state {0} has zero probability")]
    ZeroProbabilityState(usize),
    #[error("parameter outside the validity region: {0}")]
    Domain(String),
    #[error("transition matrix is not reversible: gap {gap:e} at ({i}, {j})")]
    NotReversible { i: usize, j: usize, gap: f64 },
    #[error("numerical inconsistency: {0}")]
    Numerical(String),
    #[error("null approximation has non-positive variance {0:e}")]
    DegenerateNull(f64),
    #[error("{side} never met the stopping criterion")]
    NotConverged { side: &'static str },
    #[error("invalid sampler configuration: {0}")]
    InvalidSampler(String),
    #[error("parse error on line {line}: {message}")]
    Parse { line: usize, message: String },
}

pub type Result<T> = std::result::Result<T, Error>;
