use thiserror::Error;

/// Errors raised by the library layer.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("configuration is empty")]
    EmptyConfiguration,

    #[error("no atom at location {0}")]
    NotAnAtom(f64),

    #[error("circumference mismatch: {0} vs {1}")]
    CircumferenceMismatch(f64, f64),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("series did not converge within {max_terms} terms (residual mass {residual:e})")]
    SeriesNonConvergence { max_terms: usize, residual: f64 },

    #[error("unstable parameters: lambda * s1 = {0} >= 1")]
    Unstable(f64),

    #[error("insufficient regeneration cycles: {cycles} < {required} after {steps} steps")]
    InsufficientCycles {
        cycles: usize,
        required: usize,
        steps: u64,
    },

    #[error("insufficient tail data: {levels} populated levels, need at least {required}")]
    InsufficientTailData { levels: usize, required: usize },

    #[error("parse error: {0}")]
    Parse(String),

    #[error("i/o error: {0}")]
    Io(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Error {
    Error::InvalidParameter {
        name,
        reason: reason.into(),
    }
}

/// Checks `value > 0` and finite.
pub(crate) fn require_positive(name: &'static str, value: f64) -> Result<()> {
    if value.is_finite() && value > 0.0 {
        Ok(())
    } else {
        Err(invalid(name, format!("must be positive and finite, got {value}")))
    }
}

pub(crate) fn check_steps(steps: u64) -> Result<()> {
    if steps == 0 {
        Err(invalid("steps", "must be at least 1"))
    } else {
        Ok(())
    }
}
