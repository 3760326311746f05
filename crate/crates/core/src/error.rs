//! Error type shared by every module in the crate.

use std::fmt;

/// Why an operation rejected its input.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Error {
    /// A slice length or dimension differed from what the configuration requires.
    DimensionMismatch {
        what: &'static str,
        expected: usize,
        got: usize,
    },
    /// A size that must be a power of two was not.
    NotPowerOfTwo { what: &'static str, got: usize },
    /// A configuration field violated a documented constraint.
    InvalidConfig(String),
    /// An input value was NaN or infinite where a finite value is required.
    NonFinite { what: &'static str },
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::DimensionMismatch {
                what,
                expected,
                got,
            } => write!(f, "{what}: expected length {expected}, got {got}"),
            Error::NotPowerOfTwo { what, got } => {
                write!(f, "{what}: {got} is not a power of two")
            }
            Error::InvalidConfig(msg) => write!(f, "invalid configuration: {msg}"),
            Error::NonFinite { what } => write!(f, "{what}: value is not finite"),
        }
    }
}

impl std::error::Error for Error {}

pub type Result<T> = std::result::Result<T, Error>;
