//! Symmetric PSD matrix views.
//!
//! The solver never needs random access to `A`; it needs matrix-vector
//! products, the diagonal, and small principal submatrices. The view keeps
//! `A` either dense, implicit as `scale·S·Sᵀ` over a sparse data matrix, or
//! wrapped in projection deflations `(I − xxᵀ)·A·(I − xxᵀ)`.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::sparse::DataMatrix;
use crate::tol;

#[derive(Debug, Clone)]
pub enum SymmetricMatrixView {
    /// Dense symmetric storage; the upper triangle is authoritative.
    Dense(DMatrix<f64>),
    /// `scale · S Sᵀ` for a sparse feature-by-sample matrix `S`.
    Implicit { data: DataMatrix, scale: f64 },
    /// `M A Mᵀ` with `M = (I − x_r x_rᵀ)⋯(I − x_1 x_1ᵀ)`; `directions`
    /// holds `x_1, …, x_r` in application order.
    Projected {
        base: Box<SymmetricMatrixView>,
        directions: Vec<DVector<f64>>,
    },
}

impl SymmetricMatrixView {
    /// Wraps a dense matrix, checking symmetry within [`tol::SYMMETRY`]
    /// relative to the largest entry and storing the symmetrized form.
    pub fn dense(a: DMatrix<f64>) -> Result<Self> {
        Self::dense_with_tol(a, tol::SYMMETRY)
    }

    /// [`Self::dense`] with an explicit relative symmetry tolerance.
    pub fn dense_with_tol(mut a: DMatrix<f64>, symmetry_tol: f64) -> Result<Self> {
        let n = a.nrows();
        if a.ncols() != n {
            return Err(Error::DimensionMismatch { expected: n, actual: a.ncols() });
        }
        let scale = a.iter().fold(0.0f64, |m, v| m.max(v.abs())).max(1.0);
        for i in 0..n {
            for j in (i + 1)..n {
                let dev = (a[(i, j)] - a[(j, i)]).abs();
                if dev > symmetry_tol * scale {
                    return Err(Error::Asymmetric { i, j, deviation: dev });
                }
                a[(j, i)] = a[(i, j)];
            }
        }
        Ok(Self::Dense(a))
    }

    /// Wraps a dense matrix that is symmetric by construction.
    pub(crate) fn dense_unchecked(a: DMatrix<f64>) -> Self {
        Self::Dense(a)
    }

    /// Implicit covariance `scale · S Sᵀ`.
    pub fn implicit(data: DataMatrix, scale: f64) -> Self {
        Self::Implicit { data, scale }
    }

    pub fn dim(&self) -> usize {
        match self {
            Self::Dense(a) => a.nrows(),
            Self::Implicit { data, .. } => data.n_features(),
            Self::Projected { base, .. } => base.dim(),
        }
    }

    /// `y = A x`.
    pub fn matvec(&self, x: &DVector<f64>) -> DVector<f64> {
        match self {
            Self::Dense(a) => a * x,
            Self::Implicit { data, scale } => {
                let z = data.transpose_apply(x);
                data.apply(&z) * *scale
            }
            Self::Projected { base, directions } => {
                let mut v = x.clone();
                for d in directions.iter().rev() {
                    project_out(&mut v, d);
                }
                let mut v = base.matvec(&v);
                for d in directions.iter() {
                    project_out(&mut v, d);
                }
                v
            }
        }
    }

    /// `xᵀ A x`.
    pub fn quadratic_form(&self, x: &DVector<f64>) -> Result<f64> {
        if x.len() != self.dim() {
            return Err(Error::DimensionMismatch { expected: self.dim(), actual: x.len() });
        }
        Ok(x.dot(&self.matvec(x)))
    }

    pub fn diagonal(&self) -> DVector<f64> {
        match self {
            Self::Dense(a) => a.diagonal(),
            Self::Implicit { data, scale } => DVector::from_fn(data.n_features(), |i, _| {
                data.row_norm_sq(i) * *scale
            }),
            Self::Projected { base, directions } => {
                // peel projections one at a time:
                // diag((I-xxᵀ)B(I-xxᵀ))_i = B_ii − 2 x_i (Bx)_i + x_i² (xᵀBx)
                let mut diag = base.diagonal();
                for (level, x) in directions.iter().enumerate() {
                    let w = self.matvec_prefix(level, x);
                    let s = x.dot(&w);
                    for i in 0..diag.len() {
                        diag[i] += -2.0 * x[i] * w[i] + x[i] * x[i] * s;
                    }
                }
                diag
            }
        }
    }

    /// Matvec of the view truncated to the first `levels` projections.
    fn matvec_prefix(&self, levels: usize, x: &DVector<f64>) -> DVector<f64> {
        match self {
            Self::Projected { base, directions } => {
                let dirs = &directions[..levels];
                let mut v = x.clone();
                for d in dirs.iter().rev() {
                    project_out(&mut v, d);
                }
                let mut v = base.matvec(&v);
                for d in dirs.iter() {
                    project_out(&mut v, d);
                }
                v
            }
            _ => self.matvec(x),
        }
    }

    pub fn max_diagonal(&self) -> f64 {
        self.diagonal().iter().fold(f64::NEG_INFINITY, |m, &v| m.max(v))
    }

    /// Dense principal submatrix `A[I, I]` for a small index set.
    pub fn submatrix(&self, support: &[usize]) -> Result<DMatrix<f64>> {
        let n = self.dim();
        if support.is_empty() {
            return Err(Error::EmptySupport);
        }
        for &i in support {
            if i >= n {
                return Err(Error::IndexOutOfRange { index: i, n });
            }
        }
        let k = support.len();
        match self {
            Self::Dense(a) => Ok(DMatrix::from_fn(k, k, |r, c| a[(support[r], support[c])])),
            Self::Implicit { data, scale } => {
                let mut out = DMatrix::zeros(k, k);
                for r in 0..k {
                    for c in r..k {
                        let v = data.row_dot(support[r], support[c]) * *scale;
                        out[(r, c)] = v;
                        out[(c, r)] = v;
                    }
                }
                Ok(out)
            }
            Self::Projected { base, directions } => {
                // A'[I,I] = GᵀBG with columns g_a = Mᵀ e_{i_a}
                let g: Vec<DVector<f64>> = support
                    .iter()
                    .map(|&i| {
                        let mut e = DVector::zeros(n);
                        e[i] = 1.0;
                        for d in directions.iter().rev() {
                            project_out(&mut e, d);
                        }
                        e
                    })
                    .collect();
                let h: Vec<DVector<f64>> = g.iter().map(|gi| base.matvec(gi)).collect();
                let mut out = DMatrix::zeros(k, k);
                for r in 0..k {
                    for c in r..k {
                        let v = 0.5 * (g[r].dot(&h[c]) + g[c].dot(&h[r]));
                        out[(r, c)] = v;
                        out[(c, r)] = v;
                    }
                }
                Ok(out)
            }
        }
    }

    /// Conservative entrywise-nonnegativity check used to auto-set the `p`
    /// flag: exact for dense storage; for implicit storage `S ≥ 0` is a
    /// sufficient condition for `S Sᵀ ≥ 0`. Projected views report `false`.
    pub fn is_entrywise_nonnegative(&self) -> bool {
        match self {
            Self::Dense(a) => a.iter().all(|&v| v >= 0.0),
            Self::Implicit { data, scale } => *scale >= 0.0 && data.is_nonnegative(),
            Self::Projected { .. } => false,
        }
    }

    /// Materializes the view densely (meant for moderate `n`).
    pub fn to_dense(&self) -> DMatrix<f64> {
        match self {
            Self::Dense(a) => a.clone(),
            Self::Implicit { data, scale } => {
                let n = data.n_features();
                let mut out = DMatrix::zeros(n, n);
                for i in 0..n {
                    for j in i..n {
                        let v = data.row_dot(i, j) * *scale;
                        out[(i, j)] = v;
                        out[(j, i)] = v;
                    }
                }
                out
            }
            Self::Projected { base, directions } => {
                let mut a = base.to_dense();
                for x in directions {
                    // (I−xxᵀ)A(I−xxᵀ) = A − xwᵀ − wxᵀ + s·xxᵀ with w = Ax
                    let w = &a * x;
                    let s = x.dot(&w);
                    a -= x * w.transpose();
                    a -= &w * x.transpose();
                    a += x * x.transpose() * s;
                }
                a
            }
        }
    }
}

/// `v ← v − x (xᵀ v)`.
pub(crate) fn project_out(v: &mut DVector<f64>, x: &DVector<f64>) {
    let c = x.dot(v);
    v.axpy(-c, x, 1.0);
}
