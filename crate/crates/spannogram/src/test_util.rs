//! Shared unit-test helpers.

use nalgebra::DMatrix;

/// `G Gᵀ / n`: a Wishart-style random PSD matrix from a square Gaussian `G`.
pub(crate) fn gram_scaled(g: &DMatrix<f64>, n: usize) -> DMatrix<f64> {
    let p: DMatrix<f64> = g * g.transpose();
    p / (n as f64)
}
