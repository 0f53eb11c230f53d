use thiserror::Error;

/// Errors raised by the optomech library.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("coupling rate undefined: (1 - T)^-1 - cos^2(2kq0) = {bracket:e} is not positive")]
    Domain { bracket: f64 },

    #[error(
        "steady-state iteration did not converge after {iterations} iterations \
         (last detuning {last_detuning:e}, residual {residual:e}); likely bistable"
    )]
    NoConvergence {
        iterations: usize,
        last_detuning: f64,
        residual: f64,
    },

    #[error("sideband system is numerically singular (condition estimate {condition:e})")]
    SingularSystem { condition: f64 },

    #[error("non-finite value in {what}")]
    NonFinite { what: &'static str },

    #[error("empty grid")]
    EmptyGrid,

    #[error("grid is not strictly increasing at index {index}")]
    GridOrder { index: usize },

    #[error("derivative step {step:e} underflows at x = {x:e}")]
    StepUnderflow { x: f64, step: f64 },

    #[error("response magnitude {magnitude:e} at x = {x:e} is too small for a phase derivative")]
    ZeroResponse { x: f64, magnitude: f64 },

    #[error("drive strength {beta:e} differs from the ideal-OMIT value {expected:e}")]
    WrongDrive { beta: f64, expected: f64 },

    #[error("sampled curve does not bracket an interior extremum")]
    NoBracket,

    /// Either the power outside the three harmonics or the drift of c₊
    /// between successive projections is too large.
    #[error("time-domain run did not settle: {residual:e} exceeds {limit:e}")]
    Unsettled { residual: f64, limit: f64 },

    #[error("integrator failed at t = {t:e}: {reason}")]
    StiffnessFailure { t: f64, reason: String },

    #[error("probe response is not linear: halving the probe changed c+ by {change:e} (relative)")]
    LinearityBreach { change: f64 },
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn positive(name: &'static str, value: f64) -> Result<()> {
    if value.is_finite() && value > 0.0 {
        Ok(())
    } else {
        Err(Error::InvalidParameter {
            name,
            reason: format!("must be finite and > 0, got {value}"),
        })
    }
}

pub(crate) fn non_negative(name: &'static str, value: f64) -> Result<()> {
    if value.is_finite() && value >= 0.0 {
        Ok(())
    } else {
        Err(Error::InvalidParameter {
            name,
            reason: format!("must be finite and >= 0, got {value}"),
        })
    }
}

pub(crate) fn finite(name: &'static str, value: f64) -> Result<()> {
    if value.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidParameter {
            name,
            reason: format!("must be finite, got {value}"),
        })
    }
}
