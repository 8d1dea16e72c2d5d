use thiserror::Error;

/// Errors produced by the library.
#[derive(Debug, Error)]
pub enum Error {
    /// An argument is outside the mathematical domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// A result would exceed the representable exponent range.
    #[error("range error: {0}")]
    Range(String),

    /// A series did not show sustained decay within the term cap.
    #[error(
        "series did not converge within {terms} terms (last term ratio {last_ratio:.6})"
    )]
    NonConvergence { terms: usize, last_ratio: f64 },

    /// A prebuilt structure is too small for the request.
    #[error("capacity error: {0}")]
    Capacity(String),

    /// Mismatched inputs violate an inter-module contract.
    #[error("contract error: {0}")]
    Contract(String),
}

pub type Result<T> = std::result::Result<T, Error>;
