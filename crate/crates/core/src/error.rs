use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("shape mismatch: expected {expected}, got {got}")]
    ShapeMismatch { expected: String, got: String },

    #[error("non-finite value encountered in {0}")]
    NonFinite(&'static str),

    #[error(
        "svd did not converge after {sweeps} sweeps (|M|_F = {frobenius:e}, off-diagonal = {off_diagonal:e})"
    )]
    SvdNoConvergence {
        sweeps: usize,
        frobenius: f64,
        off_diagonal: f64,
    },

    #[error("eigen-decomposition did not converge after {0} sweeps")]
    EigenNoConvergence(usize),

    #[error("matrix is singular to working precision")]
    Singular,

    #[error("Walsh-Hadamard transform needs a power-of-two length, got {0}")]
    NotPowerOfTwo(usize),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("resolvent failed: {0}")]
    Resolvent(String),

    #[error("unsupported: {0}")]
    Unsupported(String),
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }

    pub(crate) fn shape(expected: impl ToString, got: impl ToString) -> Self {
        Error::ShapeMismatch {
            expected: expected.to_string(),
            got: got.to_string(),
        }
    }
}
