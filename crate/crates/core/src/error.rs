use thiserror::Error;

/// Errors raised by bound evaluation, numerics, and scenario handling.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("domain error in {op}: {detail}")]
    Domain { op: &'static str, detail: String },

    #[error("bracket [{lo}, {hi}] does not enclose a sign change (f(lo) = {f_lo}, f(hi) = {f_hi})")]
    BracketViolation { lo: f64, hi: f64, f_lo: f64, f_hi: f64 },

    #[error("quadrature on [{a}, {b}] did not converge within {max_subdivisions} subdivisions")]
    NonConvergence { a: f64, b: f64, max_subdivisions: u32 },

    #[error("enumeration needs {required} outcomes, cap is {cap}")]
    EnumerationCap { required: u128, cap: u128 },

    #[error("invalid scenario: {0}")]
    Scenario(String),

    #[error("scenario file: {0}")]
    Parse(String),

    #[error("thread pool: {0}")]
    ThreadPool(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn domain(op: &'static str, detail: impl Into<String>) -> Error {
    Error::Domain {
        op,
        detail: detail.into(),
    }
}
