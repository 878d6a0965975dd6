use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("instance too large for exhaustive search: n = {n} exceeds cap {cap}")]
    TooLarge { n: usize, cap: usize },

    #[error("retry budget exhausted after {attempts} attempts (observed acceptance rate {acceptance_rate:.3e})")]
    RetryBudget { attempts: u64, acceptance_rate: f64 },

    #[error("no solution: {0}")]
    NoSolution(String),

    #[error("edge {edge} has {distinct} distinct vertices but needs {required} positive signs")]
    DegenerateEdge {
        edge: usize,
        distinct: usize,
        required: usize,
    },

    #[error("peeling signed vertex {vertex} more than once for edge {edge}")]
    RepeatedPeelSign { edge: usize, vertex: usize },

    #[error("step size underflow at x = {x:.6e} (step {step:.3e})")]
    StepUnderflow { x: f64, step: f64 },

    #[error("no sign change of kappa - k in bracket [{lo}, {hi}]")]
    Bracket { lo: f64, hi: f64 },

    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },
}

pub(crate) fn invalid<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::InvalidInput(msg.into()))
}
