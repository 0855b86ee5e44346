use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// A fixed-point or root solve hit its iteration cap.
    #[error("{what} did not converge after {iterations} iterations (last iterate {last}, residual {residual:e})")]
    Convergence {
        what: &'static str,
        iterations: usize,
        last: f64,
        residual: f64,
    },

    #[error("numeric failure in {what}: {detail}")]
    Numeric { what: &'static str, detail: String },

    #[error("run needs {requested} server-job updates, budget is {budget}")]
    Budget { requested: u128, budget: u64 },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error("parse error: {0}")]
    Parse(String),
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }
}

/// Rejects a value that is not finite and strictly positive.
pub(crate) fn ensure_positive(name: &str, v: f64) -> Result<()> {
    if v.is_finite() && v > 0.0 {
        Ok(())
    } else {
        Err(Error::invalid(format!("{name} must be finite and > 0, got {v}")))
    }
}

pub(crate) fn ensure_open_unit(u: f64) -> Result<()> {
    if u > 0.0 && u < 1.0 {
        Ok(())
    } else {
        Err(Error::invalid(format!("uniform variate must lie in (0, 1), got {u}")))
    }
}
