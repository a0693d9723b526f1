use thiserror::Error;

/// Errors raised by the sketching kernels, bound evaluators, and experiment harness.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension {0} is not a power of two")]
    NotPowerOfTwo(usize),

    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },

    #[error("index ({row}, {col}) out of range for dimension {n}")]
    IndexOutOfRange { row: usize, col: usize, n: usize },

    #[error("sample count {ell} out of range [1, {n}]")]
    SampleCountOutOfRange { ell: usize, n: usize },

    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("matrix of size {size} exceeds the materialization cap {cap}")]
    CapExceeded { size: u128, cap: u128 },

    #[error("matrix is not symmetric (max asymmetry {0:e})")]
    NotSymmetric(f64),

    #[error("Jacobi iteration did not converge within {0} sweeps")]
    NoConvergence(usize),

    #[error("matrix entries must be finite")]
    NonFinite,

    #[error("malformed matrix CSV: {0}")]
    Csv(String),

    #[error("malformed operator record: {0}")]
    Record(String),
}

impl Error {
    pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name,
            reason: reason.into(),
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
