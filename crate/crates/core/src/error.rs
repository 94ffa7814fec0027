use thiserror::Error;

/// Errors raised by the kernel, exact statistics, samplers and Monte Carlo harnesses.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum BifbmError {
    /// An input lies outside the mathematical domain of an operation.
    #[error("domain error: {param} = {value} ({reason})")]
    Domain {
        param: &'static str,
        value: String,
        reason: &'static str,
    },
    /// A dimension exceeds the configured matrix-size cap.
    #[error("capacity error: {what} = {requested} exceeds cap {cap}")]
    Capacity {
        what: &'static str,
        requested: usize,
        cap: usize,
    },
    /// Cholesky factorization failed even after the largest permitted jitter.
    #[error("factorization failed at pivot {pivot} with jitter {jitter:e} (input is not positive semidefinite)")]
    Factorization { pivot: usize, jitter: f64 },
}

impl BifbmError {
    pub(crate) fn domain(param: &'static str, value: impl ToString, reason: &'static str) -> Self {
        BifbmError::Domain {
            param,
            value: value.to_string(),
            reason,
        }
    }

    /// Name of the offending parameter for domain errors.
    pub fn param(&self) -> Option<&'static str> {
        match self {
            BifbmError::Domain { param, .. } => Some(param),
            BifbmError::Capacity { what, .. } => Some(what),
            BifbmError::Factorization { .. } => None,
        }
    }
}

pub type Result<T> = std::result::Result<T, BifbmError>;
