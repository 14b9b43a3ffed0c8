use std::collections::BTreeMap;

use thiserror::Error;

/// Named scalar diagnostics attached to estimates and failures.
pub type Diagnostics = BTreeMap<String, f64>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("decomposition failed: {0}")]
    DecompositionFailed(String),

    #[error("parameter not identifiable: {0}")]
    Unidentifiable(String),

    #[error("insufficient data: {0}")]
    InsufficientData(String),

    #[error("estimation failed: {reason}")]
    EstimationFailed {
        reason: String,
        diagnostics: Diagnostics,
    },

    #[error("fit rejected: relative residual {residual:.3e} exceeds {threshold:.3e}")]
    FitRejected { residual: f64, threshold: f64 },

    #[error("numeric derivative unstable: step h gives {coarse:.6e}, step h/2 gives {fine:.6e}")]
    NumericFailure { coarse: f64, fine: f64 },

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("calibration failed: {0}")]
    CalibrationFailed(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidArgument(msg.into())
}
