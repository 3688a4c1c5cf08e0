use thiserror::Error;

/// Errors raised by the simulation, solver and learning components.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum LabError {
    /// An argument lies outside the domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),
    /// A configuration value violates an invariant.
    #[error("invalid configuration `{key}`: {reason}")]
    Config { key: String, reason: String },
    /// A numerical routine failed (e.g. factorization after the full jitter ladder).
    #[error("numerical failure: {0}")]
    Numerical(String),
    /// Input shapes disagree.
    #[error("shape mismatch: expected {expected}, got {got}")]
    Shape { expected: usize, got: usize },
}

impl LabError {
    pub fn domain(msg: impl Into<String>) -> Self {
        LabError::Domain(msg.into())
    }

    pub fn config(key: impl Into<String>, reason: impl Into<String>) -> Self {
        LabError::Config {
            key: key.into(),
            reason: reason.into(),
        }
    }
}

pub type Result<T> = std::result::Result<T, LabError>;
