use thiserror::Error;

/// Errors raised by the library.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("rate alpha = {0} must lie strictly between 0 and 1")]
    InvalidRate(String),
    #[error("time {0} must be finite and nonnegative")]
    InvalidTime(f64),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("argument {value} outside the admissible range 0..={max}")]
    OutOfRange { value: usize, max: usize },
    #[error("enumeration over {sites} sites exceeds the cap of {cap}")]
    EnumerationCap { sites: usize, cap: usize },
    #[error("rank {0} exceeds the supported maximum")]
    RankTooLarge(usize),
    #[error("expected exactly one second-class particle, found {0}")]
    SecondClassMultiplicity(usize),
    #[error("truncation bound {bound:e} exceeds tolerance {tolerance:e}")]
    Truncation { bound: f64, tolerance: f64 },
    #[error("state space exceeds {0} states")]
    StateSpaceOverflow(usize),
    #[error("word {0:?} is not a minimal decomposition")]
    NotMinimal(Vec<usize>),
    #[error("cannot parse rate {0:?}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;
