use thiserror::Error;

/// Errors raised by the lab's evaluators.
///
/// Every banded computation declares the interior it needs; running out of
/// room is reported instead of silently truncating.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum LabError {
    #[error("enumeration budget exceeded: {what} (size {size}, cap {cap})")]
    Budget { what: &'static str, size: usize, cap: usize },

    #[error("length mismatch: expected {expected}, got {got}")]
    LengthMismatch { expected: usize, got: usize },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("cutoff too small: need {needed}, have {have}")]
    CutoffTooSmall { needed: i64, have: i64 },

    #[error("series diverges: radius estimate {radius:.6} >= 1")]
    Divergent { radius: f64 },

    #[error("tail estimate {estimate:.3e} exceeds tolerance {tolerance:.3e}")]
    DivergentTail { estimate: f64, tolerance: f64 },

    #[error("least-squares problem is ill-conditioned (condition {condition:.3e})")]
    IllConditioned { condition: f64 },

    #[error("symbol is not strictly positive (min sample {min:.6e})")]
    NonPositiveSymbol { min: f64 },

    #[error("tail does not decay: {0}")]
    NonDecayingTail(String),

    #[error("missing residues: need at least {needed}, have {have}")]
    MissingResidues { needed: usize, have: usize },
}

pub type Result<T> = std::result::Result<T, LabError>;
