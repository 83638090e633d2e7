use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("length mismatch: expected {expected}, got {actual}")]
    LengthMismatch { expected: usize, actual: usize },

    #[error("series too short: need at least {min} values, got {actual}")]
    TooShort { min: usize, actual: usize },

    #[error("non-finite value at position {0}")]
    NonFinite(usize),

    #[error("no boundaries")]
    NoBoundaries,

    #[error("no unique peak")]
    NoUniquePeak,

    #[error("degenerate denominator")]
    DegenerateDenominator,
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Error {
    Error::InvalidParameter {
        name,
        reason: reason.into(),
    }
}

pub(crate) fn check_len(expected: usize, actual: usize) -> Result<()> {
    if expected == actual {
        Ok(())
    } else {
        Err(Error::LengthMismatch { expected, actual })
    }
}

pub(crate) fn check_min_len(min: usize, actual: usize) -> Result<()> {
    if actual >= min {
        Ok(())
    } else {
        Err(Error::TooShort { min, actual })
    }
}
