use thiserror::Error;

/// Errors produced by the solver library.
#[derive(Debug, Error)]
pub enum Error {
    /// An argument lies outside the mathematical domain of an operation.
    #[error("domain error: {0}")]
    Domain(String),
    /// A precondition on the inputs is violated (e.g. a kernel formula that
    /// requires alpha'(0) = 0).
    #[error("precondition violated: {0}")]
    Precondition(String),
    /// Invalid run configuration (bad mesh sizes, mismatched domains, ...).
    #[error("configuration error: {0}")]
    Config(String),
    /// Numerical failure during a solve (non-SPD step matrix etc.).
    #[error("numerical failure: {0}")]
    Numerical(String),
    /// A query point lies outside the computed solution domain.
    #[error("out of domain: {0}")]
    OutOfDomain(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
