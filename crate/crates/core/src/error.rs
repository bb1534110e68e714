use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("{0} is not an odd prime in [3, 2^62)")]
    InvalidModulus(u64),

    #[error("modulus mismatch: {left} vs {right}")]
    ModulusMismatch { left: u64, right: u64 },

    #[error("invalid polynomial: {0}")]
    InvalidPolynomial(String),

    #[error("invalid box: {0}")]
    InvalidBox(String),

    #[error("y^2 - f(x) is not absolutely irreducible: {0}")]
    Reducible(String),

    #[error("curve vector is singular (zero discriminant)")]
    Singular,

    #[error("genus mismatch: {left} vs {right}")]
    GenusMismatch { left: usize, right: usize },

    #[error("enumeration guard exceeded for {what}: needs {needed:.3e} cells, limit {limit:.3e}")]
    GuardExceeded {
        what: &'static str,
        needed: f64,
        limit: f64,
    },

    #[error("invalid parameter `{key}`: {reason}")]
    InvalidParameter { key: String, reason: String },

    #[error("arithmetic overflow in {0}")]
    Overflow(&'static str),

    #[error("internal cross-check failed: {0}")]
    CrossCheck(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}: {reason}")]
    Format { path: PathBuf, reason: String },
}

impl Error {
    pub(crate) fn param(key: impl Into<String>, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            key: key.into(),
            reason: reason.into(),
        }
    }
}
