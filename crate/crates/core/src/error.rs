use num_complex::Complex64;
use thiserror::Error;

use crate::bisection::BisectionState;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("precondition violated: {0}")]
    PreconditionViolation(String),

    #[error("unsupported dimension: expected {expected}, found {found}")]
    UnsupportedDimension { expected: usize, found: usize },

    /// The grid can no longer separate the two components. The last state
    /// whose bracket was established before the failure is attached.
    #[error("resolution limit reached: {message}")]
    ResolutionLimit { message: String, state: Option<Box<BisectionState>> },

    #[error("minimizer left the region near {point:?}")]
    BoundaryHit { point: Vec<f64> },

    #[error("spectrum is degenerate: repeated eigenvalue {eigenvalue}")]
    DegenerateSpectrum { eigenvalue: Complex64 },

    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }

    pub(crate) fn precondition(msg: impl Into<String>) -> Self {
        Error::PreconditionViolation(msg.into())
    }
}
