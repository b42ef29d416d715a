use thiserror::Error;

/// Errors produced by the toolkit.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// A parameter or state outside the domain of an operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// A named model or configuration field failed validation.
    #[error("invalid value for `{field}`: {reason}")]
    InvalidField { field: String, reason: String },

    #[error("integration failed at t = {time}: {kind}")]
    Integration { time: f64, kind: IntegrationFailure },

    #[error("eigensolver failed: {0}")]
    Eigen(String),

    #[error("trajectory too short for spectral analysis: {len} samples, need at least {min}")]
    TooShort { len: usize, min: usize },

    /// The field point cloud has no well-defined principal axis.
    #[error("field phase is not locked (axis ratio {ratio:.3e})")]
    Unlocked { ratio: f64 },

    #[error("parse error: {0}")]
    Parse(String),

    #[error("i/o error: {0}")]
    Io(String),

    #[error("Newton iteration did not converge after {iterations} steps (residual {residual:.3e})")]
    NoConvergence { iterations: usize, residual: f64 },

    #[error("singular Jacobian")]
    SingularJacobian,

    /// A converged root lies outside the physical unit ball.
    #[error("fixed point outside the unit ball")]
    Unphysical,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum IntegrationFailure {
    StepUnderflow,
    NonFinite,
}

impl std::fmt::Display for IntegrationFailure {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            IntegrationFailure::StepUnderflow => write!(f, "step size underflow"),
            IntegrationFailure::NonFinite => write!(f, "non-finite state"),
        }
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(field: &str, reason: impl Into<String>) -> Error {
    Error::InvalidField { field: field.to_string(), reason: reason.into() }
}
