//! Error type shared by all solver modules.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum TransportError {
    /// A caller-supplied argument is out of range or malformed.
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// A configuration violates a stability or consistency requirement.
    #[error("configuration error: {0}")]
    Config(String),

    /// An object was used in the wrong scaled/preprocessed state.
    #[error("state error: {0}")]
    State(String),

    /// Vector/matrix dimensions do not line up.
    #[error("dimension mismatch: {0}")]
    Dimension(String),

    /// A numerical contract failed (Hermiticity, tolerance, convergence).
    #[error("numerical contract violation: {0}")]
    Numerical(String),

    /// Requested feature outside the supported problem class.
    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, TransportError>;
