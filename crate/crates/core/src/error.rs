use thiserror::Error;

/// Errors raised across the laboratory.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("parse error on line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("form file contains no terms")]
    EmptyForm,

    #[error("expected {expected} values, got {got}")]
    LengthMismatch { expected: usize, got: usize },

    #[error("variable index {index} out of range for {n_vars} variables")]
    IndexOutOfRange { index: usize, n_vars: usize },

    #[error("variable sets overlap at index {0}")]
    Overlap(usize),

    #[error("form is not homogeneous")]
    NotHomogeneous,

    #[error("expected degree {expected}, found {found}")]
    DegreeMismatch { expected: u32, found: u32 },

    #[error("budget exceeded for {what}: need {needed}, limit {limit}")]
    Budget { what: &'static str, needed: f64, limit: f64 },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("gcd({a}, {q}) != 1")]
    NotCoprime { a: i64, q: u64 },

    #[error("major arcs {first} and {second} overlap")]
    OverlappingArcs { first: String, second: String },
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn budget(what: &'static str, needed: f64, limit: f64) -> Result<()> {
    if needed > limit {
        Err(Error::Budget { what, needed, limit })
    } else {
        Ok(())
    }
}
