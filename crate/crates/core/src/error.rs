use thiserror::Error;

/// Errors shared by all toolkit operations.
#[derive(Debug, Error)]
pub enum Error {
    /// Input violated a precondition (shape, symmetry, sign, unknown label).
    #[error("validation failed: {0}")]
    Validation(String),

    /// A kernel handed to an embedding routine is not negative definite
    /// within tolerance; carries the offending Gram eigenvalue.
    #[error("kernel is not negative definite: Gram matrix has eigenvalue {eigenvalue:.6e}")]
    NotNegativeDefinite { eigenvalue: f64 },

    /// The instance is larger than the configured cap for an exponential or
    /// otherwise expensive routine.
    #[error("instance size {n} exceeds the cap of {cap} for {what}")]
    SizeLimit { n: usize, cap: usize, what: &'static str },

    /// A numerical routine failed to reach a trustworthy answer.
    #[error("solver failure: {0}")]
    Solver(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    /// Shorthand for a [`Error::Validation`] with the given message.
    pub fn validation(msg: impl Into<String>) -> Self {
        Error::Validation(msg.into())
    }
}
