//! Error type shared by all modules.

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },

    #[error("sparsity k={k} out of range for n={n}")]
    SparsityOutOfRange { k: usize, n: usize },

    #[error("rank d={d} out of range (cap {cap})")]
    RankOutOfRange { d: usize, cap: usize },

    #[error("empty support")]
    EmptySupport,

    #[error("support index {index} out of range for n={n}")]
    IndexOutOfRange { index: usize, n: usize },

    #[error("degenerate intersection system for tuple {tuple:?}")]
    DegenerateIntersection { tuple: Vec<usize> },

    #[error("eigensolver did not converge: best residual {residual:.3e} after {iterations} iterations")]
    NonConvergence { residual: f64, iterations: usize },

    #[error("matrix is not symmetric: |A[{i}][{j}] - A[{j}][{i}]| = {deviation:.3e}")]
    Asymmetric { i: usize, j: usize, deviation: f64 },

    #[error("nonnegativity flag p=1 requires an entrywise nonnegative matrix")]
    NotNonnegative,

    #[error("exhaustive search guard exceeded: C({n},{k}) > {limit}")]
    OracleGuard { n: usize, k: usize, limit: u64 },

    #[error("{path}:{line}: {message}")]
    Parse {
        path: String,
        line: usize,
        message: String,
    },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}
