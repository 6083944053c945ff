use thiserror::Error;

/// Errors raised by the numerical routines and the verification runner.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// An argument lies outside the domain where the formula is defined.
    #[error("domain error: {0}")]
    Domain(String),

    /// A fixed capacity (order cap, integer range) was exceeded.
    #[error("capacity exceeded: {0}")]
    Capacity(String),

    /// The requested method or parity is not available for this input.
    #[error("unsupported: {0}")]
    Unsupported(String),

    /// A quadrature, extrapolation or series did not reach its tolerance.
    #[error("no convergence: {what} (error estimate {estimate:e})")]
    NonConvergence { what: String, estimate: f64 },

    /// A non-finite value was produced.
    #[error("non-finite value in {0}")]
    NonFinite(String),

    /// Bad user input to the runner or CLI.
    #[error("usage: {0}")]
    Usage(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub fn capacity(msg: impl Into<String>) -> Self {
        Error::Capacity(msg.into())
    }

    pub fn unsupported(msg: impl Into<String>) -> Self {
        Error::Unsupported(msg.into())
    }

    pub fn usage(msg: impl Into<String>) -> Self {
        Error::Usage(msg.into())
    }

    pub fn non_convergence(what: impl Into<String>, estimate: f64) -> Self {
        Error::NonConvergence {
            what: what.into(),
            estimate,
        }
    }

    /// True for failures of the numerics rather than of the caller.
    pub fn is_numerical(&self) -> bool {
        matches!(self, Error::NonConvergence { .. } | Error::NonFinite(_))
    }
}
