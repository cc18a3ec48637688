use alloc::string::String;

/// Errors produced by the numerical core.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    /// Invalid or inconsistent configuration (lengths, grids, unknown tags).
    #[error("configuration error: {0}")]
    Config(String),
    /// Input outside the mathematical domain of an operation.
    #[error("domain error: {0}")]
    Domain(String),
    /// The Riccati integrator ran past its step budget.
    #[error("integration error after {steps} steps at x = {position}: {reason}")]
    Integration {
        steps: usize,
        position: f64,
        reason: String,
    },
    /// Not enough usable data points to fit a tail exponent.
    #[error("fit error: {0}")]
    Fit(String),
    /// Two independent routes disagreed beyond tolerance.
    #[error("inconsistent results: {0}")]
    Inconsistent(String),
}

pub type Result<T> = core::result::Result<T, Error>;

macro_rules! config_err {
    ($($arg:tt)*) => { $crate::Error::Config(alloc::format!($($arg)*)) };
}

macro_rules! domain_err {
    ($($arg:tt)*) => { $crate::Error::Domain(alloc::format!($($arg)*)) };
}

pub(crate) use config_err;
pub(crate) use domain_err;
