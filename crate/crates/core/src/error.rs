use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// A parameter is non-finite, non-positive or otherwise malformed.
    #[error("invalid {field}: {reason}")]
    Validation { field: &'static str, reason: String },

    /// A formula was evaluated outside the domain where it is defined.
    #[error("domain error: {0}")]
    Domain(String),

    /// A frequency lies outside the band where the requested form applies.
    #[error("omega = {omega:.4e} s^-1 outside [{lo:.4e}, {hi:.4e}]: {hint}")]
    Range {
        omega: f64,
        lo: f64,
        hi: f64,
        hint: &'static str,
    },

    /// The geometry or time lies outside the asymptotic window of a closed form.
    #[error("regime violation: {0}")]
    Regime(String),

    /// The asymptotic expansion of a closed form is no longer ordered.
    #[error("expansion breakdown: {0}")]
    Breakdown(String),

    #[error("quadrature did not reach tolerance within {panels} panels: estimate {estimate:.6e} +/- {error:.3e}")]
    Quadrature {
        estimate: f64,
        error: f64,
        panels: usize,
    },

    #[error("eigensolver failed for eigenvalue #{index}: residual {residual:.3e} after {sweeps} sweeps")]
    Solver {
        index: usize,
        residual: f64,
        sweeps: usize,
    },

    /// A caller broke a documented contract (for example, passed an unnormalized mode).
    #[error("contract violation: {0}")]
    Contract(String),

    #[error("fit error: {0}")]
    Fit(String),

    #[error("perturbative expansion invalid: {0}")]
    Expansion(String),
}

impl Error {
    pub(crate) fn validation(field: &'static str, reason: impl Into<String>) -> Self {
        Error::Validation {
            field,
            reason: reason.into(),
        }
    }

    /// True for failures of the numerical machinery rather than of the inputs.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::Quadrature { .. } | Error::Solver { .. } | Error::Fit(_)
        )
    }
}

pub(crate) fn require_positive(field: &'static str, value: f64) -> Result<f64> {
    if !value.is_finite() {
        return Err(Error::validation(field, format!("must be finite, got {value}")));
    }
    if value <= 0.0 {
        return Err(Error::validation(field, format!("must be positive, got {value}")));
    }
    Ok(value)
}
