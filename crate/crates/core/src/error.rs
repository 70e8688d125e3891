use thiserror::Error;

/// Errors raised by the numerical routines.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("invalid state: {0}")]
    InvalidState(String),

    #[error("numerical domain error: {0}")]
    NumericalDomain(String),

    #[error("degenerate state: {0}")]
    DegenerateState(String),

    #[error("finite-difference step too small: delta = {delta:e} at T = {temperature:e}")]
    StepTooSmall { delta: f64, temperature: f64 },

    #[error("omega = {omega} is outside the discrete support [{lo}, {hi}]")]
    OutsideSupport { omega: f64, lo: f64, hi: f64 },

    #[error("divergent integral: {0}")]
    Divergence(String),

    #[error("omega = {omega} coincides with a discrete mode")]
    Pole { omega: f64 },

    #[error(
        "integration of {what} did not converge: value {value:e}, error estimate {abs_error:e}, {intervals} intervals"
    )]
    Integration {
        what: String,
        value: f64,
        abs_error: f64,
        intervals: usize,
    },

    #[error("unstable chain: smallest squared normal frequency {min_sq:e}")]
    UnstableChain { min_sq: f64 },

    #[error("zero mode at index {index}: enable regularization to clamp it to the gap floor")]
    ZeroMode { index: usize },

    #[error("ill-conditioned cosine system: condition estimate {condition:e}")]
    IllConditioned { condition: f64 },

    #[error("linear algebra failure: {0}")]
    LinearAlgebra(String),

    #[error("mode matching failed: {0}")]
    ModeMatching(String),

    #[error("sequence did not converge: {0}")]
    Convergence(String),

    #[error("fit failed: {0}")]
    Fit(String),

    #[error("outside asymptotic domain: {0}")]
    AsymptoticDomain(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn ensure_finite(name: &str, x: f64) -> Result<()> {
    if x.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!("{name} must be finite, got {x}")))
    }
}

pub(crate) fn ensure_positive(name: &str, x: f64) -> Result<()> {
    if x.is_finite() && x > 0.0 {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!("{name} must be positive and finite, got {x}")))
    }
}

pub(crate) fn ensure_non_negative(name: &str, x: f64) -> Result<()> {
    if x.is_finite() && x >= 0.0 {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!("{name} must be non-negative and finite, got {x}")))
    }
}
