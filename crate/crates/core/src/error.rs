use thiserror::Error;

/// Errors raised by model constructors and operations.
#[derive(Debug, Error)]
pub enum Error {
    /// A parameter violated its domain (negative energy, zero capacity, ...).
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    /// A scenario failed validation before the simulation started.
    #[error("malformed scenario: {0}")]
    Scenario(String),

    #[error("csv: {0}")]
    Csv(#[from] csv::Error),

    #[error("json: {0}")]
    Json(#[from] serde_json::Error),

    #[error("io: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Error {
    Error::InvalidParameter {
        name,
        reason: reason.into(),
    }
}

/// Rejects NaN and anything below zero.
pub(crate) fn non_negative(name: &'static str, value: f64) -> Result<f64> {
    if value.is_nan() || value < 0.0 {
        Err(invalid(name, format!("must be >= 0, got {value}")))
    } else {
        Ok(value)
    }
}

pub(crate) fn positive(name: &'static str, value: f64) -> Result<f64> {
    if value.is_nan() || value <= 0.0 {
        Err(invalid(name, format!("must be > 0, got {value}")))
    } else {
        Ok(value)
    }
}
