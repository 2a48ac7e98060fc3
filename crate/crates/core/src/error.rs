use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("length mismatch: expected {expected}, got {actual}")]
    LengthMismatch { expected: usize, actual: usize },
    #[error("index {index} out of range for length {len}")]
    IndexOutOfRange { index: usize, len: usize },
    #[error("no invertible h0 found after {0} resamples")]
    KeygenExhausted(usize),
    #[error("cannot fit: {0}")]
    DegenerateFit(String),
    #[error("no extrapolation: {0}")]
    NoExtrapolation(String),
    #[error("parse error: {0}")]
    Parse(String),
}
