use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    Parameter(String),

    #[error("outside the domain of {what}: {value}")]
    Domain { what: &'static str, value: f64 },

    #[error("ground-state shooting did not converge: {0}")]
    NonConvergence(String),

    #[error("grid too small: tail value {tail:.3e} at r = {r_max} exceeds {tol:.1e}")]
    GridTooSmall { r_max: f64, tail: f64, tol: f64 },

    #[error("grid under-resolves the profile: step {dr} exceeds {limit}")]
    Resolution { dr: f64, limit: f64 },

    #[error("spectrum truncated: bandwidth too small for the field")]
    Truncated,

    #[error("criterion not applicable: {0}")]
    Inapplicable(String),

    #[error("too few samples: need {needed}, have {have}")]
    TooFewSamples { needed: usize, have: usize },

    #[error("unreliable run at t = {t:.4}: {quantity} drift {drift:.3e} exceeds {tol:.1e}")]
    Unreliable {
        t: f64,
        quantity: &'static str,
        drift: f64,
        tol: f64,
    },

    #[error("invalid bracket: {0}")]
    Bracket(String),

    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;
