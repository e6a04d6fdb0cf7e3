//! Error types shared across the crate.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("matrix is not symmetric (max |Z - Z'| = {0:.3e})")]
    NotSymmetric(f64),

    #[error("coarsening infeasible: m*r = {requested} exceeds n = {available}")]
    Infeasible { requested: usize, available: usize },

    #[error("coarsening pool exhausted: no community has unselected nodes left")]
    PoolExhausted,

    #[error("spectral condition violated: {0}")]
    SpectralRadius(String),

    #[error("resolvent does not exist: {0}")]
    Resolvent(String),

    #[error("estimated community {0} has no mass")]
    EmptyCommunity(usize),

    #[error("pure-row matrix is numerically singular (cond > {0:.1e})")]
    RankDeficient(f64),

    #[error("pruning removed too many rows: kept {kept}, need at least {need}")]
    OverPruned { kept: usize, need: usize },

    #[error("estimated membership row {0} sums to zero after thresholding")]
    ZeroMembershipRow(usize),

    #[error("degenerate controllability vector: ||v - 1||_1 = {0:.3e}")]
    DegenerateVector(f64),

    #[error("zero denominator in diagnostic: {0}")]
    ZeroDenominator(String),

    #[error("config error: {0}")]
    Config(String),

    #[error("eigendecomposition failed (LAPACK info = {0})")]
    Lapack(i32),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;
