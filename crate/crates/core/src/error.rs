use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid model: {0}")]
    InvalidModel(String),

    #[error("order condition violated: {0}")]
    OrderCondition(String),

    #[error("no-Turing condition violated: {0}")]
    Turing(String),

    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("singular matrix (pivot {pivot} at row {row})")]
    Singular { row: usize, pivot: f64 },

    #[error("{what} did not converge after {iterations} iterations (residual {residual:e})")]
    NoConvergence {
        what: &'static str,
        iterations: usize,
        residual: f64,
    },

    #[error("continuation failed at parameter {at}; last good value {last_good}")]
    Continuation { at: f64, last_good: f64 },

    #[error("no sign change of the marginal growth rate in speed bracket [{lo}, {hi}]")]
    NoBracket { lo: f64, hi: f64 },

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("{0}")]
    Numerics(String),

    #[error("simulation aborted at t = {t}: {reason}")]
    SimulationAborted { t: f64, reason: String },

    #[error("parse error at line {line}: {message}")]
    Parse { line: u64, message: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
