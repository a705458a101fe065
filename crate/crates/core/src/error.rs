use thiserror::Error;

/// Errors raised by the moment formulas, quadrature routines and the simulator.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum PamError {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("closed form is only available up to order {max}, got {order}")]
    UnsupportedOrder { order: usize, max: usize },

    #[error("invalid configuration: {0}")]
    Config(String),

    /// The integrator ran out of budget. `best` is the last estimate.
    #[error("no convergence after {evals} evaluations (best estimate {best:e}, error estimate {err_est:e})")]
    Convergence {
        best: f64,
        err_est: f64,
        evals: usize,
    },

    #[error("accuracy check failed: {0}")]
    Accuracy(String),

    #[error("non-finite field in replica {replica} at step {step}")]
    Overflow { replica: usize, step: usize },

    #[error("extrapolated rate has no sign change on the velocity grid")]
    FrontNotBracketed,
}

pub type Result<T> = std::result::Result<T, PamError>;

pub(crate) fn domain(msg: impl Into<String>) -> PamError {
    PamError::Domain(msg.into())
}

pub(crate) fn config(msg: impl Into<String>) -> PamError {
    PamError::Config(msg.into())
}

pub(crate) fn ensure_finite(name: &str, x: f64) -> Result<()> {
    if x.is_finite() {
        Ok(())
    } else {
        Err(domain(format!("{name} must be finite, got {x}")))
    }
}

pub(crate) fn ensure_positive(name: &str, x: f64) -> Result<()> {
    if x.is_finite() && x > 0.0 {
        Ok(())
    } else {
        Err(domain(format!(
            "{name} must be positive and finite, got {x}"
        )))
    }
}

pub(crate) fn ensure_nonnegative(name: &str, x: f64) -> Result<()> {
    if x.is_finite() && x >= 0.0 {
        Ok(())
    } else {
        Err(domain(format!(
            "{name} must be nonnegative and finite, got {x}"
        )))
    }
}
