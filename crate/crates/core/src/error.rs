use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    /// A documented precondition of an operation was not met by the caller.
    #[error("contract violation: {0}")]
    Contract(String),

    #[error("matrix is not invertible at {location}: smallest singular value {sigma:.3e} below {threshold:.1e}")]
    Singular {
        location: String,
        sigma: f64,
        threshold: f64,
    },

    #[error("{what} did not converge: last refinement changed the value by {delta:.3e} (tolerance {tolerance:.1e})")]
    Unconverged {
        what: String,
        delta: f64,
        tolerance: f64,
    },

    #[error("{what} is not integral: value {value:.12} has residual {residual:.3e} (tolerance {tolerance:.1e})")]
    NotIntegral {
        what: String,
        value: f64,
        residual: f64,
        tolerance: f64,
    },

    #[error("{what}: paths disagree by {difference:.3e} (tolerance {tolerance:.1e})")]
    Mismatch {
        what: String,
        difference: f64,
        tolerance: f64,
    },
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn contract(msg: impl Into<String>) -> Error {
    Error::Contract(msg.into())
}
