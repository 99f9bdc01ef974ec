use thiserror::Error;

/// Errors raised by state construction, measures, and protocol evaluation.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },

    #[error("matrix is not square: {rows}x{cols}")]
    NotSquare { rows: usize, cols: usize },

    #[error("entry count {len} does not match shape {rows}x{cols}")]
    BadShape { rows: usize, cols: usize, len: usize },

    #[error("non-finite matrix entry")]
    NonFinite,

    #[error("matrix is not Hermitian (deviation {0:e})")]
    NotHermitian(f64),

    #[error("matrix is not positive semidefinite (min eigenvalue {0:e})")]
    NotPsd(f64),

    #[error("trace is not 1 (got {0})")]
    BadTrace(f64),

    #[error("state vector is not normalized (norm {0})")]
    NotNormalized(f64),

    #[error("subsystem dims {dims:?} do not multiply to {total}")]
    BadDims { dims: Vec<usize>, total: usize },

    #[error("subsystem index {index} out of range for {count} subsystems")]
    SubsystemOutOfRange { index: usize, count: usize },

    #[error("expected a bipartite state, got {0} subsystems")]
    NotBipartite(usize),

    #[error("parameter `{name}` = {value} outside {domain}")]
    OutOfRange {
        name: &'static str,
        value: f64,
        domain: &'static str,
    },

    #[error("dense construction of dimension {requested} exceeds budget {budget}")]
    BudgetExceeded { requested: usize, budget: usize },

    #[error("no feasible catalyst parameter: {0}")]
    Infeasible(String),

    #[error("random full-rank state generation failed after {0} attempts")]
    SamplingFailed(usize),

    #[error("iteration did not converge after {0} steps")]
    NoConvergence(usize),

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("i/o error: {0}")]
    Io(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn check_range(
    name: &'static str,
    value: f64,
    ok: bool,
    domain: &'static str,
) -> Result<()> {
    if ok && value.is_finite() {
        Ok(())
    } else {
        Err(Error::OutOfRange {
            name,
            value,
            domain,
        })
    }
}
