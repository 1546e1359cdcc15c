use thiserror::Error;

/// Errors produced by the library.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// Two objects that must share an alphabet or shape do not.
    #[error("dimension mismatch: {0}")]
    Dimension(String),

    /// A probability vector, channel row or distortion table failed validation.
    #[error("invalid input: {0}")]
    Invalid(String),

    /// An enumeration would exceed the configured outcome cap.
    #[error("capacity exceeded: {what} needs {needed} entries, cap is {cap}")]
    Capacity {
        what: &'static str,
        needed: u128,
        cap: u128,
    },

    /// A scalar argument is outside the domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// No point of the search family satisfies the constraints.
    #[error("infeasible: {0}")]
    Infeasible(String),

    /// A message, common-randomness or symbol index is out of range.
    #[error("index out of range: {0}")]
    IndexOutOfRange(String),
}

pub type Result<T> = std::result::Result<T, Error>;
