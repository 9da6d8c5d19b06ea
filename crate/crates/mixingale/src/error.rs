//! Error type shared by the core modules.

use thiserror::Error;

/// Errors raised by lattice, conditional-expectation and process operations.
#[derive(Debug, Error)]
pub enum Error {
    /// Two elements (or an element and an operator) live on different spaces.
    #[error("sample space mismatch: {left} vs {right} atoms")]
    SpaceMismatch { left: usize, right: usize },

    /// A sample space failed validation (weights, atom count).
    #[error("invalid sample space: {0}")]
    InvalidSpace(String),

    /// A partition failed validation (coverage, disjointness, empty block).
    #[error("invalid partition: {0}")]
    InvalidPartition(String),

    /// An argument was out of its documented domain.
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// A documented precondition did not hold for the given inputs.
    #[error("precondition violated: {0}")]
    Precondition(String),

    /// Exhaustive enumeration would exceed the configured atom cap.
    #[error("atom cap exceeded: {required} atoms > cap {cap}; use the monte-carlo backend")]
    AtomCapExceeded { required: u128, cap: usize },

    /// A mixingale certificate was rejected before an experiment started.
    #[error("certificate rejected: {0}")]
    CertificateRejected(String),
}

pub type Result<T> = std::result::Result<T, Error>;
