use thiserror::Error;

/// Errors raised by the numerical routines.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("non-finite entry at ({row}, {col})")]
    NonFinite { row: usize, col: usize },

    #[error("dimension mismatch: expected {expected:?}, found {found:?}")]
    DimensionMismatch {
        expected: (usize, usize),
        found: (usize, usize),
    },

    #[error("invalid `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("complement of a full mask is empty")]
    EmptyComplement,

    #[error("observed matrix has a nonzero entry at ({row}, {col}) outside the sample mask")]
    UnmaskedEntry { row: usize, col: usize },

    #[error("observed data is identically zero on the sample mask")]
    ZeroObservation,

    #[error("reference matrix has zero Frobenius norm")]
    ZeroReference,

    #[error("iteration {iteration}: non-finite value in the iterate")]
    NonFiniteIterate { iteration: usize },

    #[error("iteration {iteration}: residual {residual:e} exceeded the divergence guard")]
    Diverged { iteration: usize, residual: f64 },

    #[error("decomposition failed: {0}")]
    Decomposition(String),

    #[error("hyperfine tensor `{name}` is not symmetric (max asymmetry {asymmetry:e})")]
    AsymmetricTensor { name: &'static str, asymmetry: f64 },

    #[error("cannot assign eigenstates to electron manifolds (level anticrossing near {field_gauss} G?)")]
    ManifoldAssignment { field_gauss: f64 },

    #[error("frequency {frequency_hz} Hz is above the Nyquist limit {nyquist_hz} Hz")]
    AboveNyquist { frequency_hz: f64, nyquist_hz: f64 },
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Error {
    Error::InvalidParameter {
        name,
        reason: reason.into(),
    }
}
