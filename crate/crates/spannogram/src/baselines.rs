//! Comparison methods and the ground-truth oracle: PCA plus thresholding,
//! the truncated power method, and exhaustive search over supports.

use nalgebra::DVector;

use crate::eigen::leading_eigenpair_on_support;
use crate::error::{Error, Result};
use crate::matrix::SymmetricMatrixView;
use crate::parallel::map_collect;
use crate::solver::{sparse_pca, NonnegMode, SolveOptions};


/// Cap on `C(n, k)` for the exhaustive oracle.
pub const ORACLE_GUARD: u64 = 1_000_000;

#[derive(Debug, Clone)]
pub struct BaselineResult {
    pub method: &'static str,
    pub support: Vec<usize>,
    pub loadings: DVector<f64>,
    pub value: f64,
    pub iterations_used: usize,
}

/// PCA + thresholding: keep the `k` largest-magnitude entries of the leading
/// eigenvector and re-score on `A`. This is exactly the rank-1 solver path.
pub fn thresholding_pc(a: &SymmetricMatrixView, k: usize) -> Result<BaselineResult> {
    let opts = SolveOptions { nonneg: NonnegMode::Mixed, ..SolveOptions::default() };
    let pc = sparse_pca(a, k, 1, &opts)?;
    Ok(BaselineResult {
        method: "thresholding",
        support: pc.support,
        loadings: pc.loadings,
        value: pc.value,
        iterations_used: 1,
    })
}

/// Start vector for the truncated power method.
#[derive(Debug, Clone, Default)]
pub enum TPowerInit {
    /// Ones on the `k` features of highest variance (largest diagonal).
    #[default]
    TopVariance,
    Given(DVector<f64>),
}

/// Truncated power method: `x ← normalize(truncate_k(A x))`, where
/// `truncate_k` zeroes all but the `k` largest-magnitude entries. Stops when
/// the support repeats and the value stabilizes, or after `max_iters`.
pub fn truncated_power_method(
    a: &SymmetricMatrixView,
    k: usize,
    max_iters: usize,
    init: TPowerInit,
) -> Result<BaselineResult> {
    let n = a.dim();
    if k == 0 || k > n {
        return Err(Error::SparsityOutOfRange { k, n });
    }
    if max_iters == 0 {
        return Err(Error::InvalidArgument("max_iters must be at least 1".into()));
    }

    let mut x = match init {
        TPowerInit::TopVariance => {
            let diag = a.diagonal();
            let mut order: Vec<usize> = (0..n).collect();
            order.sort_by(|&i, &j| diag[j].partial_cmp(&diag[i]).unwrap().then(i.cmp(&j)));
            let mut x = DVector::zeros(n);
            for &i in order.iter().take(k) {
                x[i] = 1.0;
            }
            x / (k as f64).sqrt()
        }
        TPowerInit::Given(v) => {
            if v.len() != n {
                return Err(Error::DimensionMismatch { expected: n, actual: v.len() });
            }
            let norm = v.norm();
            if norm == 0.0 {
                return Err(Error::InvalidArgument("init vector must be nonzero".into()));
            }
            v / norm
        }
    };

    let fallback_support = current_support(&x, k);
    let mut support = fallback_support.clone();
    let mut value = a.quadratic_form(&x)?;
    let mut iterations = 0usize;
    for iter in 1..=max_iters {
        iterations = iter;
        let mut y = a.matvec(&x);
        let next_support = truncate_to_top_k(&mut y, k);
        let norm = y.norm();
        if norm == 0.0 {
            // A x vanished; report the initialization-based result
            let (v, loadings) = leading_eigenpair_on_support(a, &fallback_support)?;
            return Ok(BaselineResult {
                method: "tpower",
                support: fallback_support,
                loadings,
                value: v,
                iterations_used: iter,
            });
        }
        x = y / norm;
        let next_value = a.quadratic_form(&x)?;
        // truncated power iteration never decreases the objective on PSD A
        debug_assert!(next_value >= value - 1e-12 * value.abs().max(1.0));
        let stable = next_support == support
            && (next_value - value).abs() <= 1e-10 * value.abs().max(1.0);
        support = next_support;
        value = next_value;
        if stable {
            break;
        }
    }
    let (value, loadings) = leading_eigenpair_on_support(a, &support)?;
    Ok(BaselineResult { method: "tpower", support, loadings, value, iterations_used: iterations })
}

fn current_support(x: &DVector<f64>, k: usize) -> Vec<usize> {
    let mut order: Vec<usize> = (0..x.len()).collect();
    order.sort_by(|&i, &j| x[j].abs().partial_cmp(&x[i].abs()).unwrap().then(i.cmp(&j)));
    let mut support: Vec<usize> = order[..k].to_vec();
    support.sort_unstable();
    support
}

/// Zeroes all but the `k` largest-magnitude entries; returns their indices.
fn truncate_to_top_k(y: &mut DVector<f64>, k: usize) -> Vec<usize> {
    let support = current_support(y, k);
    let mut keep = vec![false; y.len()];
    for &i in &support {
        keep[i] = true;
    }
    for i in 0..y.len() {
        if !keep[i] {
            y[i] = 0.0;
        }
    }
    support
}

pub fn binomial(n: usize, k: usize) -> u64 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut out: u64 = 1;
    for i in 0..k {
        out = out.saturating_mul((n - i) as u64) / (i + 1) as u64;
    }
    out
}

/// Exhaustive search over all `C(n, k)` supports: the module's ground truth.
/// Guarded by [`ORACLE_GUARD`].
pub fn brute_force_oracle(a: &SymmetricMatrixView, k: usize) -> Result<(Vec<usize>, f64)> {
    use itertools::Itertools;
    let n = a.dim();
    if k == 0 || k > n {
        return Err(Error::SparsityOutOfRange { k, n });
    }
    let combos = binomial(n, k);
    if combos > ORACLE_GUARD {
        return Err(Error::OracleGuard { n, k, limit: ORACLE_GUARD });
    }
    let supports: Vec<Vec<usize>> = (0..n).combinations(k).collect();
    let scored: Vec<Result<f64>> =
        map_collect(&supports, |s| leading_eigenpair_on_support(a, s).map(|(v, _)| v));
    let mut best: Option<(usize, f64)> = None;
    for (i, v) in scored.into_iter().enumerate() {
        let v = v?;
        match best {
            None => best = Some((i, v)),
            Some((_, bv)) if v > bv => best = Some((i, v)),
            _ => {}
        }
    }
    let (idx, value) = best.expect("at least one support");
    Ok((supports[idx].clone(), value))
}

/// Per-iteration objective values of the truncated power method, used to
/// check the monotonicity property on PSD matrices.
pub fn tpower_value_trace(
    a: &SymmetricMatrixView,
    k: usize,
    max_iters: usize,
) -> Result<Vec<f64>> {
    let n = a.dim();
    if k == 0 || k > n {
        return Err(Error::SparsityOutOfRange { k, n });
    }
    let diag = a.diagonal();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| diag[j].partial_cmp(&diag[i]).unwrap().then(i.cmp(&j)));
    let mut x = DVector::zeros(n);
    for &i in order.iter().take(k) {
        x[i] = 1.0;
    }
    x /= (k as f64).sqrt();
    let mut trace = vec![a.quadratic_form(&x)?];
    for _ in 0..max_iters {
        let mut y = a.matvec(&x);
        truncate_to_top_k(&mut y, k);
        let norm = y.norm();
        if norm == 0.0 {
            break;
        }
        x = y / norm;
        trace.push(a.quadratic_form(&x)?);
    }
    Ok(trace)
}
