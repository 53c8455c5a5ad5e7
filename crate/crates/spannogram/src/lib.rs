//! Sparse principal component analysis by exact combinatorial search over a
//! low-rank approximation.
//!
//! The solver computes a `k`-sparse leading principal component of a PSD
//! matrix `A`: it takes the best rank-`d` approximation `A_d`, enumerates the
//! finitely many candidate supports that can be optimal for `A_d` (the
//! spannogram construction), re-scores every candidate on the full matrix,
//! and returns the best one together with a data-dependent approximation
//! bound. A safe feature-elimination step shrinks the enumeration so the
//! method stays practical for large, sparse data sets.
//!
//! Entry points:
//! - [`solver::sparse_pca`]: the end-to-end solver.
//! - [`spannogram::solve_rank_d_exact`]: exact sparse PCA on a rank-`d` matrix.
//! - [`elimination::eliminate_features`]: safe row screening for a low-rank factor.
//! - [`baselines`]: thresholding, truncated power method, exhaustive oracle.
//! - [`experiments`]: spiked-covariance recovery and spectrum studies.
//! - [`io`]: matrix file formats and result serialization.

pub mod baselines;
pub mod elimination;
pub mod error;
pub mod experiments;
pub mod io;
pub mod matrix;
pub mod solver;
pub mod spannogram;

mod eigen;
mod parallel;
mod sparse;
#[cfg(test)]
mod test_util;

pub use eigen::{leading_eigenpair_on_support, top_eigenpairs, EigenPairs};
pub use error::{Error, Result};
pub use matrix::SymmetricMatrixView;
pub use parallel::configure_threads;
pub use sparse::DataMatrix;

/// Numerical tolerances used across the crate. Each value is part of an
/// operation's contract; tests pin them.
pub mod tol {
    /// Eigenpair residual target: `‖A v − λ v‖ ≤ EIGEN_RESIDUAL * max(λ₁, 1)`.
    pub const EIGEN_RESIDUAL: f64 = 1e-8;
    /// Eigenvalues in `[-PSD_CLAMP·λ₁, 0]` are treated as exact zeros.
    pub const PSD_CLAMP: f64 = 1e-10;
    /// An intersection system is degenerate when its second-smallest singular
    /// value falls below `DEGENERACY * largest` (the smallest is structurally
    /// zero: the system has one more unknown than equations).
    pub const DEGENERACY: f64 = 1e-10;
    /// Relative tolerance for "these curve values are tied".
    pub const TIE: f64 = 1e-8;
    /// Relative tolerance under which two candidate objective values are
    /// considered equal; ties go to the lexicographically smaller support.
    pub const VALUE_TIE: f64 = 1e-12;
    /// Symmetry check for dense matrix ingestion.
    pub const SYMMETRY: f64 = 1e-9;
    /// Practical cap on the approximation rank `d`; the enumeration is
    /// `O(n^d)` and becomes impractical beyond this.
    pub const RANK_CAP: usize = 6;
}
