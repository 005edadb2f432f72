use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("omega word exhausted after {0} bits")]
    OmegaExhausted(usize),

    #[error("point {value} outside the domain {domain}")]
    Domain { value: String, domain: &'static str },

    #[error("zero input: the orbit has terminated and carries the infinite digit")]
    ZeroInput,

    #[error("digit overflow: 1/|x| exceeds the 64-bit digit range")]
    DigitOverflow,

    #[error("invariant violated: {0}")]
    InvariantViolation(String),

    #[error("index {index} out of range for a trace of length {len}")]
    OutOfRange { index: usize, len: usize },

    #[error("solver did not converge: residual {residual:e} after {iterations} iterations")]
    NonConvergence { iterations: usize, residual: f64 },

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;
