use thiserror::Error;

use crate::designer::CandidateRecord;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("matrix is not positive definite (pivot {pivot} = {value:e})")]
    NotPositiveDefinite { pivot: usize, value: f64 },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("series diverges or failed to converge: {0}")]
    Divergence(String),

    #[error("quadrature did not reach tolerance {tolerance:e} on [{lo}, {hi}]")]
    QuadratureNonConvergence { lo: f64, hi: f64, tolerance: f64 },

    #[error("invalid boundary: {0}")]
    InvalidBoundary(String),

    #[error("target {target:e} outside attainable range [{lo:e}, {hi:e}]")]
    Infeasible { target: f64, lo: f64, hi: f64 },

    #[error("no feasible candidate among {} examined", log.len())]
    DesignInfeasible { log: Vec<CandidateRecord> },

    #[error("root bracket failure: {0}")]
    BracketFailure(String),

    #[error("undefined: {0}")]
    Undefined(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}
