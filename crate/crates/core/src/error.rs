use thiserror::Error;

/// Errors produced by the numerical routines.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("domain error in {func}: {detail}")]
    Domain { func: &'static str, detail: String },

    #[error("overflow in {func} at x = {x}")]
    Overflow { func: &'static str, x: f64 },

    #[error("integration did not converge: value {value:e}, error estimate {err_estimate:e}")]
    NonConvergence { value: f64, err_estimate: f64 },

    #[error("envelope tail diverges; truncation error cannot be bounded")]
    DivergentEnvelope,

    #[error("no sign change found in [{lo}, {hi}]")]
    Bracket { lo: f64, hi: f64 },
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn domain(func: &'static str, detail: impl Into<String>) -> Error {
    Error::Domain {
        func,
        detail: detail.into(),
    }
}
