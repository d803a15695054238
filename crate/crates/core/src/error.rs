use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("variable count mismatch: {0} vs {1}")]
    NvarsMismatch(usize, usize),
    #[error("operands live in different scalar fields")]
    FieldMismatch,
    #[error("degree mismatch: {0} vs {1}")]
    DegreeMismatch(usize, usize),
    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),
    #[error("polynomial is not divisible by the linear form (remainder {0:e})")]
    NotDivisible(f64),
    #[error("index {0} out of range for {1} entries")]
    IndexOutOfRange(usize, usize),
    #[error("exponent vector {0:?} does not have degree {1}")]
    BadExponent(Vec<u32>, usize),
    #[error("invalid architecture {0:?}: {1}")]
    InvalidArchitecture(Vec<usize>, String),
    #[error("architecture {0:?} is not binary")]
    NotBinary(Vec<usize>),
    #[error("architecture {0:?} is not shallow")]
    NotShallow(Vec<usize>),
    #[error("pole hit: intermediate value {0:e} at layer {1}")]
    DomainError(f64, usize),
    #[error("{0} is not a prime below 2^62")]
    InvalidPrime(u64),
    #[error("root finder did not converge after {0} iterations")]
    NonConvergence(usize),
    #[error("zero diagonal entry in symmetry transform (layer {0}, index {1})")]
    ZeroDiagonal(usize, usize),
    #[error("not a permutation: {0:?}")]
    BadPermutation(Vec<usize>),
    #[error("every sample is within the pole guard")]
    AllPointsSkipped,
    #[error("unsupported: {0}")]
    Unsupported(String),
    #[error("json: {0}")]
    Json(String),
    #[error("io: {0}")]
    Io(String),
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Json(e.to_string())
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<csv::Error> for Error {
    fn from(e: csv::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
