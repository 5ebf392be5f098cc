use thiserror::Error;

/// Errors raised by the solver and its evaluators.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("index out of range: {0}")]
    IndexOutOfRange(String),

    #[error("evaluation on singular set ({what}); distance to singularity {distance:e}")]
    Singular { what: String, distance: f64 },

    #[error("quadrature did not reach tolerance: estimate {estimate:e}, error {error:e}")]
    Quadrature { estimate: f64, error: f64 },

    #[error("quadratic form is not positive definite: {0}")]
    Indefinite(String),

    #[error("polygons must be sorted by per-pole mass: {0}")]
    Unsorted(String),

    #[error("field has zero L^2* norm")]
    ZeroField,

    #[error("linear algebra failure: {0}")]
    Linalg(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::InvalidParameter(msg.into()))
}
