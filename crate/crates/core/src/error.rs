use thiserror::Error;

/// Errors raised by the library. The variants map one-to-one onto the
/// failure classes the command-line front end reports through exit codes.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    /// Input outside the mathematical domain of an operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// A configured size limit would be exceeded.
    #[error("capacity error: {what} is {actual}, limit is {limit}")]
    Capacity {
        what: &'static str,
        actual: u128,
        limit: u128,
    },

    /// A set-theoretic precondition failed; `witness` is an offending element when one was found.
    #[error("precondition failed: {message}{}", .witness.map(|w| format!(" (witness {w})")).unwrap_or_default())]
    Precondition { message: String, witness: Option<i128> },

    /// A certificate or transcript failed independent re-validation.
    #[error("validation failed: {0}")]
    Validation(String),

    /// An argument is outside the supported parameter range.
    #[error("range error: {0}")]
    Range(String),

    /// Required input data is missing or malformed.
    #[error("input error: {0}")]
    Input(String),

    /// An internal construction step failed although its preconditions held.
    #[error("invariant violated: {0}")]
    Invariant(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn capacity(what: &'static str, actual: impl Into<u128>, limit: impl Into<u128>) -> Self {
        Error::Capacity {
            what,
            actual: actual.into(),
            limit: limit.into(),
        }
    }

    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub(crate) fn validation(msg: impl Into<String>) -> Self {
        Error::Validation(msg.into())
    }
}
