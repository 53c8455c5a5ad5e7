//! Sparse feature-by-sample data matrix.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

/// Sparse `n × m` feature-by-sample matrix `S`, stored by row (CSR).
/// The covariance of the data set is `A = S·Sᵀ`, held implicitly by
/// [`crate::SymmetricMatrixView`].
#[derive(Debug, Clone, PartialEq)]
pub struct DataMatrix {
    n_features: usize,
    n_samples: usize,
    row_ptr: Vec<usize>,
    col_idx: Vec<u32>,
    values: Vec<f64>,
}

impl DataMatrix {
    /// Builds from `(feature, sample, value)` triplets (0-based indices).
    /// Duplicate coordinates are summed; exact zeros are dropped.
    pub fn from_triplets(
        n_features: usize,
        n_samples: usize,
        triplets: &[(usize, usize, f64)],
    ) -> Result<Self> {
        for &(i, j, _) in triplets {
            if i >= n_features {
                return Err(Error::IndexOutOfRange { index: i, n: n_features });
            }
            if j >= n_samples {
                return Err(Error::IndexOutOfRange { index: j, n: n_samples });
            }
        }
        let mut sorted: Vec<(usize, usize, f64)> = triplets.to_vec();
        sorted.sort_unstable_by_key(|&(i, j, _)| (i, j));

        let mut row_ptr = vec![0usize; n_features + 1];
        let mut col_idx = Vec::with_capacity(sorted.len());
        let mut values: Vec<f64> = Vec::with_capacity(sorted.len());
        let mut last: Option<(usize, u32)> = None;
        for &(i, j, v) in &sorted {
            if last == Some((i, j as u32)) {
                *values.last_mut().unwrap() += v;
                continue;
            }
            col_idx.push(j as u32);
            values.push(v);
            row_ptr[i + 1] += 1;
            last = Some((i, j as u32));
        }
        for r in 0..n_features {
            row_ptr[r + 1] += row_ptr[r];
        }
        let mut out = Self { n_features, n_samples, row_ptr, col_idx, values };
        out.drop_zeros();
        Ok(out)
    }

    fn drop_zeros(&mut self) {
        if !self.values.contains(&0.0) {
            return;
        }
        let mut row_ptr = vec![0usize; self.n_features + 1];
        let mut col_idx = Vec::with_capacity(self.col_idx.len());
        let mut values = Vec::with_capacity(self.values.len());
        for r in 0..self.n_features {
            for e in self.row_ptr[r]..self.row_ptr[r + 1] {
                if self.values[e] != 0.0 {
                    col_idx.push(self.col_idx[e]);
                    values.push(self.values[e]);
                }
            }
            row_ptr[r + 1] = col_idx.len();
        }
        self.row_ptr = row_ptr;
        self.col_idx = col_idx;
        self.values = values;
    }

    /// Builds from dense column-major data (used by the sampling code).
    pub fn from_dense(data: &DMatrix<f64>) -> Self {
        let (n, m) = data.shape();
        let mut row_ptr = vec![0usize; n + 1];
        let mut col_idx = Vec::new();
        let mut values = Vec::new();
        for i in 0..n {
            for j in 0..m {
                let v = data[(i, j)];
                if v != 0.0 {
                    col_idx.push(j as u32);
                    values.push(v);
                }
            }
            row_ptr[i + 1] = col_idx.len();
        }
        Self { n_features: n, n_samples: m, row_ptr, col_idx, values }
    }

    pub fn n_features(&self) -> usize {
        self.n_features
    }

    pub fn n_samples(&self) -> usize {
        self.n_samples
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    /// Entries of row `i` as `(sample, value)` pairs, samples ascending.
    pub fn row(&self, i: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let lo = self.row_ptr[i];
        let hi = self.row_ptr[i + 1];
        self.col_idx[lo..hi]
            .iter()
            .zip(&self.values[lo..hi])
            .map(|(&j, &v)| (j as usize, v))
    }

    /// All entries as `(feature, sample, value)` triplets in row-major order.
    pub fn triplets(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        (0..self.n_features).flat_map(move |i| self.row(i).map(move |(j, v)| (i, j, v)))
    }

    pub fn is_nonnegative(&self) -> bool {
        self.values.iter().all(|&v| v >= 0.0)
    }

    /// `y = Sᵀ x` (length `m`).
    pub fn transpose_apply(&self, x: &DVector<f64>) -> DVector<f64> {
        let mut y = DVector::zeros(self.n_samples);
        for i in 0..self.n_features {
            let xi = x[i];
            if xi != 0.0 {
                for (j, v) in self.row(i) {
                    y[j] += v * xi;
                }
            }
        }
        y
    }

    /// `y = S z` (length `n`).
    pub fn apply(&self, z: &DVector<f64>) -> DVector<f64> {
        let mut y = DVector::zeros(self.n_features);
        for i in 0..self.n_features {
            let mut acc = 0.0;
            for (j, v) in self.row(i) {
                acc += v * z[j];
            }
            y[i] = acc;
        }
        y
    }

    /// Dense `SᵀS` (m × m). Cost `Σ_i nnz(row i)²`.
    pub fn gram_samples(&self) -> DMatrix<f64> {
        let m = self.n_samples;
        let mut t = DMatrix::zeros(m, m);
        for i in 0..self.n_features {
            let lo = self.row_ptr[i];
            let hi = self.row_ptr[i + 1];
            for a in lo..hi {
                let (ja, va) = (self.col_idx[a] as usize, self.values[a]);
                for b in lo..hi {
                    t[(ja, self.col_idx[b] as usize)] += va * self.values[b];
                }
            }
        }
        t
    }

    /// Sparse dot product of rows `a` and `b`.
    pub fn row_dot(&self, a: usize, b: usize) -> f64 {
        let (mut pa, ea) = (self.row_ptr[a], self.row_ptr[a + 1]);
        let (mut pb, eb) = (self.row_ptr[b], self.row_ptr[b + 1]);
        let mut acc = 0.0;
        while pa < ea && pb < eb {
            match self.col_idx[pa].cmp(&self.col_idx[pb]) {
                std::cmp::Ordering::Less => pa += 1,
                std::cmp::Ordering::Greater => pb += 1,
                std::cmp::Ordering::Equal => {
                    acc += self.values[pa] * self.values[pb];
                    pa += 1;
                    pb += 1;
                }
            }
        }
        acc
    }

    /// Squared Euclidean norm of row `i`, i.e. the diagonal entry `(S Sᵀ)_ii`.
    pub fn row_norm_sq(&self, i: usize) -> f64 {
        let lo = self.row_ptr[i];
        let hi = self.row_ptr[i + 1];
        self.values[lo..hi].iter().map(|v| v * v).sum()
    }

    /// Returns a copy with the given feature rows zeroed out. Dimensions are
    /// preserved so feature indices stay stable.
    pub fn zero_rows(&self, rows: &[usize]) -> Self {
        let mut zap = vec![false; self.n_features];
        for &r in rows {
            if r < self.n_features {
                zap[r] = true;
            }
        }
        let mut row_ptr = vec![0usize; self.n_features + 1];
        let mut col_idx = Vec::with_capacity(self.col_idx.len());
        let mut values = Vec::with_capacity(self.values.len());
        for i in 0..self.n_features {
            if !zap[i] {
                for e in self.row_ptr[i]..self.row_ptr[i + 1] {
                    col_idx.push(self.col_idx[e]);
                    values.push(self.values[e]);
                }
            }
            row_ptr[i + 1] = col_idx.len();
        }
        Self { n_features: self.n_features, n_samples: self.n_samples, row_ptr, col_idx, values }
    }

    /// Dense realization (test/debug helper; avoid on large matrices).
    pub fn to_dense(&self) -> DMatrix<f64> {
        let mut out = DMatrix::zeros(self.n_features, self.n_samples);
        for (i, j, v) in self.triplets() {
            out[(i, j)] = v;
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn triplet_construction_sums_duplicates() {
        let m = DataMatrix::from_triplets(3, 2, &[(0, 1, 2.0), (0, 1, 3.0), (2, 0, 1.0)]).unwrap();
        assert_eq!(m.nnz(), 2);
        assert_eq!(m.row(0).collect::<Vec<_>>(), vec![(1, 5.0)]);
        assert_eq!(m.row(2).collect::<Vec<_>>(), vec![(0, 1.0)]);
    }

    #[test]
    fn out_of_range_triplet_rejected() {
        assert!(DataMatrix::from_triplets(2, 2, &[(2, 0, 1.0)]).is_err());
        assert!(DataMatrix::from_triplets(2, 2, &[(0, 2, 1.0)]).is_err());
    }

    #[test]
    fn apply_matches_dense() {
        let m = DataMatrix::from_triplets(
            3,
            4,
            &[(0, 0, 1.0), (0, 3, -2.0), (1, 1, 0.5), (2, 2, 4.0), (2, 3, 1.0)],
        )
        .unwrap();
        let d = m.to_dense();
        let z = DVector::from_vec(vec![1.0, -1.0, 2.0, 0.5]);
        assert!((m.apply(&z) - &d * &z).norm() < 1e-14);
        let x = DVector::from_vec(vec![0.3, 0.7, -1.1]);
        assert!((m.transpose_apply(&x) - d.transpose() * &x).norm() < 1e-14);
        assert!((m.gram_samples() - d.transpose() * &d).norm() < 1e-14);
        assert!((m.row_dot(0, 2) - (-2.0)).abs() < 1e-15);
    }

    #[test]
    fn zero_rows_preserves_shape() {
        let m = DataMatrix::from_triplets(3, 2, &[(0, 0, 1.0), (1, 1, 2.0), (2, 0, 3.0)]).unwrap();
        let z = m.zero_rows(&[0, 2]);
        assert_eq!(z.n_features(), 3);
        assert_eq!(z.nnz(), 1);
        assert_eq!(z.row(1).collect::<Vec<_>>(), vec![(1, 2.0)]);
        // stripping nothing is the identity
        assert_eq!(m.zero_rows(&[]), m);
        // stripping everything gives the zero matrix
        assert_eq!(m.zero_rows(&[0, 1, 2]).nnz(), 0);
    }
}
