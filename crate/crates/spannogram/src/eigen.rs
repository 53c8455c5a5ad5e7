//! Leading eigenpairs of symmetric PSD views.
//!
//! Dense storage gets a direct symmetric solve. Implicit `scale·S Sᵀ` views
//! are solved on whichever Gram side is small (`SᵀS` when `m` is small, a
//! materialized `S Sᵀ` when `n` is small) and fall back to blocked subspace
//! iteration when both sides are large.

use nalgebra::{DMatrix, DVector};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};
use crate::matrix::{project_out, SymmetricMatrixView};
use crate::tol;

/// Dimension up to which a dense direct solve is preferred.
const DIRECT_LIMIT: usize = 512;
const SUBSPACE_MAX_ITERS: usize = 1000;

/// Leading eigenpairs, eigenvalues non-increasing, eigenvectors orthonormal
/// columns with the largest-magnitude entry of each forced positive.
#[derive(Debug, Clone)]
pub struct EigenPairs {
    pub values: Vec<f64>,
    /// `n × d` matrix of eigenvector columns aligned with `values`.
    pub vectors: DMatrix<f64>,
    /// True when fewer pairs than requested carry spectral mass above the
    /// PSD tolerance.
    pub truncated: bool,
}

impl EigenPairs {
    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

/// Computes the `d` leading eigenpairs of `a`.
///
/// Eigenvalues below `tol::PSD_CLAMP · λ₁` are treated as zero; if that
/// leaves fewer than `d` pairs the result is truncated and flagged.
pub fn top_eigenpairs(a: &SymmetricMatrixView, d: usize) -> Result<EigenPairs> {
    let n = a.dim();
    if d == 0 || d > n {
        return Err(Error::RankOutOfRange { d, cap: n });
    }
    match a {
        SymmetricMatrixView::Dense(m) => Ok(trim(dense_eigenpairs(m), d)),
        SymmetricMatrixView::Implicit { data, scale } => {
            if data.n_samples() <= DIRECT_LIMIT {
                let t = data.gram_samples() * *scale;
                let gram = dense_eigenpairs(&t);
                // lift: T u = θ u  ⇒  A (S u) = θ (S u)
                let mut values = Vec::new();
                let mut cols = Vec::new();
                for (idx, &theta) in gram.values.iter().enumerate() {
                    if theta <= 0.0 {
                        break;
                    }
                    let u = gram.vectors.column(idx).into_owned();
                    let mut v = data.apply(&u);
                    let norm = v.norm();
                    if norm == 0.0 {
                        break;
                    }
                    v /= norm;
                    values.push(theta);
                    cols.push(v);
                }
                Ok(trim(assemble(n, values, cols), d))
            } else if n <= DIRECT_LIMIT {
                Ok(trim(dense_eigenpairs(&a.to_dense()), d))
            } else {
                subspace_iteration(a, d)
            }
        }
        SymmetricMatrixView::Projected { .. } => projected_eigenpairs(a, d),
    }
}

fn projected_eigenpairs(a: &SymmetricMatrixView, d: usize) -> Result<EigenPairs> {
    let n = a.dim();
    // walk to the innermost base, collecting all projection directions
    let mut dirs: Vec<&DVector<f64>> = Vec::new();
    let mut base = a;
    while let SymmetricMatrixView::Projected { base: b, directions } = base {
        // outer projections apply after inner ones
        let mut level: Vec<&DVector<f64>> = directions.iter().collect();
        level.extend(dirs);
        dirs = level;
        base = b;
    }
    match base {
        SymmetricMatrixView::Implicit { data, scale } if data.n_samples() <= DIRECT_LIMIT => {
            // W = M S column by column, then the small Gram Wᵀ W
            let m = data.n_samples();
            let mut w = data.to_dense();
            for j in 0..m {
                let mut col = w.column(j).into_owned();
                for x in &dirs {
                    project_out(&mut col, x);
                }
                w.set_column(j, &col);
            }
            let t = w.transpose() * &w * *scale;
            let gram = dense_eigenpairs(&t);
            let mut values = Vec::new();
            let mut cols = Vec::new();
            for (idx, &theta) in gram.values.iter().enumerate() {
                if theta <= 0.0 {
                    break;
                }
                let u = gram.vectors.column(idx).into_owned();
                let mut v = &w * u;
                let norm = v.norm();
                if norm == 0.0 {
                    break;
                }
                v /= norm;
                values.push(theta);
                cols.push(v);
            }
            Ok(trim(assemble(n, values, cols), d))
        }
        _ if n <= 4 * DIRECT_LIMIT => Ok(trim(dense_eigenpairs(&a.to_dense()), d)),
        _ => subspace_iteration(a, d),
    }
}

/// Full symmetric eigendecomposition, sorted, sign-normalized, PSD-clamped.
fn dense_eigenpairs(m: &DMatrix<f64>) -> EigenPairs {
    let eig = m.clone().symmetric_eigen();
    let n = m.nrows();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| eig.eigenvalues[j].partial_cmp(&eig.eigenvalues[i]).unwrap());
    let values: Vec<f64> = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let cols: Vec<DVector<f64>> =
        order.iter().map(|&i| eig.eigenvectors.column(i).into_owned()).collect();
    assemble(n, values, cols)
}

fn assemble(n: usize, values: Vec<f64>, cols: Vec<DVector<f64>>) -> EigenPairs {
    let lambda1 = values.first().copied().unwrap_or(0.0).max(0.0);
    let clamp = tol::PSD_CLAMP * lambda1;
    let values: Vec<f64> = values
        .into_iter()
        .map(|v| if v < 0.0 && v >= -clamp { 0.0 } else { v })
        .collect();
    let mut vectors = DMatrix::zeros(n, cols.len());
    for (j, mut c) in cols.into_iter().enumerate() {
        normalize_sign(&mut c);
        vectors.set_column(j, &c);
    }
    EigenPairs { values, vectors, truncated: false }
}

/// Keeps the first `d` pairs whose eigenvalue exceeds the PSD tolerance.
fn trim(pairs: EigenPairs, d: usize) -> EigenPairs {
    let lambda1 = pairs.values.first().copied().unwrap_or(0.0);
    let floor = tol::PSD_CLAMP * lambda1.max(0.0);
    let mut keep = 0;
    for &v in pairs.values.iter().take(d) {
        if v > floor {
            keep += 1;
        } else {
            break;
        }
    }
    // a zero matrix still exposes its leading (zero) pair
    if keep == 0 && !pairs.values.is_empty() {
        keep = 1;
    }
    EigenPairs {
        values: pairs.values[..keep].to_vec(),
        vectors: pairs.vectors.columns(0, keep).into_owned(),
        truncated: keep < d,
    }
}

/// Forces the largest-magnitude entry positive (first such entry on ties)
/// so eigenvectors are reproducible across solver paths.
pub(crate) fn normalize_sign(v: &mut DVector<f64>) {
    let mut best = 0usize;
    for i in 1..v.len() {
        if v[i].abs() > v[best].abs() {
            best = i;
        }
    }
    if v[best] < 0.0 {
        *v = -&*v;
    }
}

/// Blocked subspace iteration with Rayleigh–Ritz extraction for large
/// implicit operators. Deterministic: the start block is seeded internally.
fn subspace_iteration(a: &SymmetricMatrixView, d: usize) -> Result<EigenPairs> {
    let n = a.dim();
    let block = (d + 3).min(n);
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed_0001);
    let start = DMatrix::from_fn(n, block, |_, _| StandardNormal.sample(&mut rng));
    let mut q = start.qr().q();

    let mut best_residual = f64::INFINITY;
    for iter in 0..SUBSPACE_MAX_ITERS {
        // one operator application per iteration, reused for Ritz extraction
        let mut y = DMatrix::zeros(n, block);
        for j in 0..block {
            y.set_column(j, &a.matvec(&q.column(j).into_owned()));
        }
        let mut h = q.transpose() * &y;
        for r in 0..block {
            for c in (r + 1)..block {
                let s = 0.5 * (h[(r, c)] + h[(c, r)]);
                h[(r, c)] = s;
                h[(c, r)] = s;
            }
        }
        let small = dense_eigenpairs(&h);
        let lambda1 = small.values.first().copied().unwrap_or(0.0).max(1e-300);

        let mut worst = 0.0f64;
        for j in 0..d.min(small.len()) {
            let wj = small.vectors.column(j);
            let ritz = &q * wj.into_owned();
            let resid = (&y * small.vectors.column(j).into_owned() - &ritz * small.values[j])
                .norm();
            worst = worst.max(resid);
        }
        best_residual = best_residual.min(worst);
        if worst <= 1e-10 * lambda1.max(1.0) || iter == SUBSPACE_MAX_ITERS - 1 {
            if worst <= tol::EIGEN_RESIDUAL * lambda1.max(1.0) {
                let mut values = Vec::with_capacity(d);
                let mut cols = Vec::with_capacity(d);
                for j in 0..d.min(small.len()) {
                    values.push(small.values[j]);
                    cols.push(&q * small.vectors.column(j).into_owned());
                }
                return Ok(trim(assemble(n, values, cols), d));
            }
            break;
        }
        q = y.qr().q();
    }
    Err(Error::NonConvergence { residual: best_residual, iterations: SUBSPACE_MAX_ITERS })
}

/// Largest eigenvalue and eigenvector of the principal submatrix `A[I, I]`,
/// zero-extended to length `n`. The support must be nonempty, in range, and
/// duplicate-free.
pub fn leading_eigenpair_on_support(
    a: &SymmetricMatrixView,
    support: &[usize],
) -> Result<(f64, DVector<f64>)> {
    if support.is_empty() {
        return Err(Error::EmptySupport);
    }
    let mut seen = support.to_vec();
    seen.sort_unstable();
    seen.dedup();
    if seen.len() != support.len() {
        return Err(Error::InvalidArgument("support indices must be distinct".into()));
    }
    let sub = a.submatrix(support)?;
    let (value, local) = if support.len() == 1 {
        (sub[(0, 0)], DVector::from_element(1, 1.0))
    } else {
        let pairs = dense_eigenpairs(&sub);
        (pairs.values[0], pairs.vectors.column(0).into_owned())
    };
    let mut x = DVector::zeros(a.dim());
    for (slot, &i) in support.iter().enumerate() {
        x[i] = local[slot];
    }
    normalize_sign(&mut x);
    Ok((value.max(0.0), x))
}
