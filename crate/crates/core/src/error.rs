use thiserror::Error;

/// Errors raised by the analytic layer, the oracle, and the config front end.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("time {t} outside tabulated range [{lo}, {hi}]")]
    Range { t: f64, lo: f64, hi: f64 },

    #[error("{what} did not converge (achieved residual {residual:e})")]
    Numeric { what: String, residual: f64 },

    #[error("unsupported configuration: {0}")]
    Unsupported(String),

    #[error("coupling magnitude vanishes at t = {t}; mode transformation undefined")]
    DegenerateCoupling { t: f64 },

    #[error("sector of {size} states exceeds capacity limit {limit}")]
    Capacity { size: u128, limit: usize },

    #[error("step size underflow at t = {t} (h = {h:e}); system too stiff for tolerance")]
    Stiffness { t: f64, h: f64 },

    #[error("truncation boundary mass {tail:e} exceeds budget {budget:e}; increase the cutoff")]
    TruncationInsufficient { tail: f64, budget: f64 },

    #[error("shape mismatch: expected {expected}, found {found}")]
    Shape { expected: usize, found: usize },
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Self::InvalidParameter(msg.into())
    }

    pub(crate) fn unsupported(msg: impl Into<String>) -> Self {
        Self::Unsupported(msg.into())
    }
}
