use thiserror::Error;

/// Errors raised by the shrinkage engine.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum ShrinkError {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("unknown prior family `{0}` (registered: horseshoe, tpbn, gdp, inverse-gamma, half-t, neg)")]
    UnknownFamily(String),

    #[error(
        "quadrature did not converge after {panels} panels: denominator {denominator:e} ± {denominator_error:e}, numerator {numerator:e} ± {numerator_error:e}"
    )]
    Convergence {
        panels: usize,
        denominator: f64,
        denominator_error: f64,
        numerator: f64,
        numerator_error: f64,
    },

    #[error("posterior variance identities disagree: {first:e} vs {second:e} (relative gap {gap:e})")]
    IdentityMismatch { first: f64, second: f64, gap: f64 },

    #[error("interpolation table error {max_error:e} exceeds tolerance {tolerance:e}")]
    Interpolation { max_error: f64, tolerance: f64 },

    #[error("no root: {0}")]
    NoRoot(String),

    #[error("monotonicity check failed: {0}")]
    Monotonicity(String),

    #[error("report error: {0}")]
    Report(String),

    #[error("io error at {path}: {message}")]
    Io { path: String, message: String },
}

impl ShrinkError {
    /// True for failures of the numerical machinery rather than of the inputs.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            ShrinkError::Convergence { .. }
                | ShrinkError::IdentityMismatch { .. }
                | ShrinkError::Interpolation { .. }
                | ShrinkError::NoRoot(_)
                | ShrinkError::Monotonicity(_)
        )
    }
}

pub type Result<T> = std::result::Result<T, ShrinkError>;

pub(crate) fn invalid(msg: impl Into<String>) -> ShrinkError {
    ShrinkError::InvalidParameter(msg.into())
}
