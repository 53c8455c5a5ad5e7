//! End-to-end sparse PCA: low-rank factor, feature elimination, candidate
//! enumeration, re-scoring on the full matrix, approximation bound, and
//! deflation for multiple components.

use nalgebra::DVector;

use crate::eigen::{leading_eigenpair_on_support, top_eigenpairs};
use crate::elimination::eliminate_features;
use crate::error::{Error, Result};
use crate::matrix::SymmetricMatrixView;
use crate::parallel::map_collect;
use crate::spannogram::{
    enumerate_once, perturb, validate_enumeration, CandidateSupportSet, LowRankFactor,
};
use crate::sparse::DataMatrix;
use crate::tol;

/// How the entrywise-nonnegativity flag `p` is chosen.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum NonnegMode {
    /// Detect from the matrix: exact scan for dense storage, `S ≥ 0` for
    /// implicit storage.
    #[default]
    Auto,
    /// Force the mixed-sign path (always valid).
    Mixed,
    /// Assert nonnegativity. Verified on dense storage, trusted on implicit.
    Nonnegative,
}

#[derive(Debug, Clone)]
pub struct SolveOptions {
    pub nonneg: NonnegMode,
    /// Run the safe feature-elimination step before enumeration.
    pub elimination: bool,
    /// Seed for the degeneracy-breaking perturbation.
    pub seed: u64,
}

impl Default for SolveOptions {
    fn default() -> Self {
        Self { nonneg: NonnegMode::Auto, elimination: true, seed: 0 }
    }
}

/// Theorem-style approximation bound attached to a solution:
/// `value ≥ (1 − ε_d) · OPT` with
/// `ε_d = min((n/k)·λ_{d+1}/λ₁, λ_{d+1}/λ₁⁽¹⁾)`.
#[derive(Debug, Clone)]
pub struct BoundReport {
    pub d: usize,
    /// `min(term_spectral, term_diagonal)`, clamped to `[0, 1]`.
    pub epsilon_d: f64,
    /// `max(0, 1 − ε_d)`.
    pub ratio_lower: f64,
    /// `(n/k) · λ_{d+1} / λ₁` (unclamped).
    pub term_spectral: f64,
    /// `λ_{d+1} / λ₁⁽¹⁾` (unclamped).
    pub term_diagonal: f64,
    pub lambda_d_plus_1: f64,
    pub lambda_1: f64,
    /// `λ₁⁽¹⁾`: largest diagonal element of `A`.
    pub lambda_1_diag: f64,
}

#[derive(Debug, Clone)]
pub struct SparsePrincipalComponent {
    /// Sorted, exactly `k` distinct indices.
    pub support: Vec<usize>,
    /// Unit-norm loadings, zero off support.
    pub loadings: DVector<f64>,
    /// `xᵀ A x = λ_max(A_support)`.
    pub value: f64,
    /// Approximation rank actually used (may be below the request when the
    /// matrix has lower numerical rank).
    pub rank_used: usize,
    pub bound: BoundReport,
    /// Number of candidate supports that were re-scored on `A`.
    pub candidates: usize,
    /// Features surviving elimination (`n` when elimination is off).
    pub retained_features: usize,
}

/// Computes the rank-`d` approximation bound from the leading `d+1`
/// eigenvalues (`spectrum` may be longer; shorter is an error).
pub fn approximation_bound(
    spectrum: &[f64],
    d: usize,
    lambda_1_diag: f64,
    n: usize,
    k: usize,
) -> Result<BoundReport> {
    if spectrum.len() < d + 1 {
        return Err(Error::InvalidArgument(format!(
            "need {} eigenvalues for the rank-{} bound, got {}",
            d + 1,
            d,
            spectrum.len()
        )));
    }
    if k == 0 || k > n {
        return Err(Error::SparsityOutOfRange { k, n });
    }
    let scale = spectrum[0].abs().max(1.0);
    for w in spectrum.windows(2) {
        if w[1] > w[0] + 1e-12 * scale {
            return Err(Error::InvalidArgument("spectrum must be non-increasing".into()));
        }
    }
    if spectrum.iter().any(|&v| v < -1e-12 * scale) {
        return Err(Error::InvalidArgument("spectrum must be nonnegative".into()));
    }
    let lambda_1 = spectrum[0].max(0.0);
    let lambda_d1 = spectrum[d].max(0.0);
    let (term_spectral, term_diagonal) = if lambda_d1 <= 0.0 {
        (0.0, 0.0)
    } else {
        (
            (n as f64 / k as f64) * lambda_d1 / lambda_1,
            if lambda_1_diag > 0.0 { lambda_d1 / lambda_1_diag } else { 0.0 },
        )
    };
    let raw = term_spectral.min(term_diagonal);
    Ok(BoundReport {
        d,
        epsilon_d: raw.clamp(0.0, 1.0),
        ratio_lower: (1.0 - raw).clamp(0.0, 1.0),
        term_spectral,
        term_diagonal,
        lambda_d_plus_1: lambda_d1,
        lambda_1,
        lambda_1_diag,
    })
}

fn resolve_nonneg(a: &SymmetricMatrixView, mode: NonnegMode) -> Result<bool> {
    match mode {
        NonnegMode::Auto => Ok(a.is_entrywise_nonnegative()),
        NonnegMode::Mixed => Ok(false),
        NonnegMode::Nonnegative => {
            if let SymmetricMatrixView::Dense(_) = a {
                if !a.is_entrywise_nonnegative() {
                    return Err(Error::NotNonnegative);
                }
            }
            Ok(true)
        }
    }
}

/// Candidate supports in original indexing, after optional elimination.
/// Degenerate intersections anywhere trigger one global perturbation of the
/// factor and a full redo, so screening and enumeration always see the same
/// curves.
fn candidates_for(
    factor: &LowRankFactor,
    k: usize,
    opts: &SolveOptions,
) -> Result<(CandidateSupportSet, usize)> {
    let run = |f: &LowRankFactor| -> Result<(CandidateSupportSet, usize)> {
        if opts.elimination {
            let screened = eliminate_features(f, k)?;
            let set = enumerate_once(&screened.reduced, k)?;
            Ok((set.map_indices(&screened.retained), screened.retained.len()))
        } else {
            Ok((enumerate_once(f, k)?, f.n()))
        }
    };
    match run(factor) {
        Ok(out) => Ok(out),
        Err(Error::DegenerateIntersection { .. }) => run(&perturb(factor, opts.seed)),
        Err(e) => Err(e),
    }
}

/// Sparse PCA via a rank-`d` approximation.
///
/// Builds the top-`d` factor of `a`, screens and enumerates candidate
/// supports on it, scores every candidate by the leading eigenvalue of the
/// corresponding principal submatrix of the *full* `a`, and returns the best;
/// value ties within [`tol::VALUE_TIE`] go to the lexicographically smallest
/// support.
pub fn sparse_pca(
    a: &SymmetricMatrixView,
    k: usize,
    d: usize,
    opts: &SolveOptions,
) -> Result<SparsePrincipalComponent> {
    let n = a.dim();
    validate_enumeration(n, d, k)?;
    let nonneg = resolve_nonneg(a, opts.nonneg)?;

    let pairs = top_eigenpairs(a, (d + 1).min(n))?;
    let lambda_1_diag = a.max_diagonal().max(0.0);

    // degenerate input: no spectral mass at all
    if pairs.values.iter().all(|&v| v <= 0.0) {
        let support: Vec<usize> = (0..k).collect();
        let mut loadings = DVector::zeros(n);
        loadings[0] = 1.0;
        return Ok(SparsePrincipalComponent {
            support,
            loadings,
            value: 0.0,
            rank_used: d,
            bound: approximation_bound(&vec![0.0; d + 1], d, lambda_1_diag, n, k)?,
            candidates: 0,
            retained_features: n,
        });
    }

    let mut spectrum = pairs.values.clone();
    spectrum.resize(d + 1, 0.0);
    let bound = approximation_bound(&spectrum, d, lambda_1_diag, n, k)?;

    let rank_used = pairs.len().min(d);
    let head = crate::eigen::EigenPairs {
        values: pairs.values[..rank_used].to_vec(),
        vectors: pairs.vectors.columns(0, rank_used).into_owned(),
        truncated: rank_used < d,
    };
    let factor = LowRankFactor::from_eigenpairs(&head, nonneg)?;

    let (candidates, retained_features) = candidates_for(&factor, k, opts)?;
    let supports: Vec<Vec<usize>> = candidates.supports().map(|s| s.to_vec()).collect();
    let scored: Vec<Result<f64>> =
        map_collect(&supports, |s| leading_eigenpair_on_support(a, s).map(|(v, _)| v));

    let mut best: Option<(usize, f64)> = None;
    for (i, value) in scored.into_iter().enumerate() {
        let value = value?;
        match best {
            None => best = Some((i, value)),
            Some((_, bv)) if value > bv + tol::VALUE_TIE * bv.abs() => best = Some((i, value)),
            _ => {}
        }
    }
    let (idx, _) = best.expect("candidate set is never empty");
    let (value, loadings) = leading_eigenpair_on_support(a, &supports[idx])?;

    Ok(SparsePrincipalComponent {
        support: supports[idx].clone(),
        loadings,
        value,
        rank_used,
        bound,
        candidates: supports.len(),
        retained_features,
    })
}

/// Rank needed for a `(1 − ε)`-approximation at sparsity `k = δ·n` when the
/// spectrum decays as `λ_i = C·i^{−α}`: the smallest `d ≥ 1` with
/// `(d+1)^{−α} ≤ ε·δ`.
#[derive(Debug, Clone, Copy)]
pub struct RankPlan {
    pub d: usize,
    /// Set when `d` exceeds the practical enumeration cap.
    pub exceeds_cap: bool,
}

pub fn required_rank_for_accuracy(alpha: f64, epsilon: f64, delta: f64) -> Result<RankPlan> {
    if !alpha.is_finite() || alpha <= 0.0 {
        return Err(Error::InvalidArgument("alpha must be positive".into()));
    }
    if !epsilon.is_finite() || epsilon <= 0.0 || epsilon >= 1.0 {
        return Err(Error::InvalidArgument("epsilon must be in (0, 1)".into()));
    }
    if !delta.is_finite() || delta <= 0.0 || delta > 1.0 {
        return Err(Error::InvalidArgument("delta must be in (0, 1]".into()));
    }
    let target = epsilon * delta;
    let mut d = ((target.powf(-1.0 / alpha)).ceil() as usize).saturating_sub(1).max(1);
    // float guard: make d minimal such that (d+1)^{-α} ≤ εδ
    while ((d + 1) as f64).powf(-alpha) > target {
        d += 1;
    }
    while d > 1 && (d as f64).powf(-alpha) <= target {
        d -= 1;
    }
    Ok(RankPlan { d, exceeds_cap: d > tol::RANK_CAP })
}

/// Projection deflation `A′ = (I − xxᵀ) A (I − xxᵀ)` for a unit vector `x`.
/// Dense inputs are materialized; implicit inputs stay implicit behind a
/// projected view.
pub fn deflate_projection(
    a: &SymmetricMatrixView,
    x: &DVector<f64>,
) -> Result<SymmetricMatrixView> {
    if x.len() != a.dim() {
        return Err(Error::DimensionMismatch { expected: a.dim(), actual: x.len() });
    }
    if (x.norm() - 1.0).abs() > 1e-9 {
        return Err(Error::InvalidArgument("deflation direction must be unit norm".into()));
    }
    match a {
        SymmetricMatrixView::Dense(_) => {
            let projected = SymmetricMatrixView::Projected {
                base: Box::new(a.clone()),
                directions: vec![x.clone()],
            };
            Ok(SymmetricMatrixView::dense_unchecked(projected.to_dense()))
        }
        SymmetricMatrixView::Implicit { .. } => Ok(SymmetricMatrixView::Projected {
            base: Box::new(a.clone()),
            directions: vec![x.clone()],
        }),
        SymmetricMatrixView::Projected { base, directions } => {
            let mut directions = directions.clone();
            directions.push(x.clone());
            Ok(SymmetricMatrixView::Projected { base: base.clone(), directions })
        }
    }
}

/// Strip deflation: zero the support's feature rows in the data matrix so
/// the recomputed covariance has zero rows and columns there. Dimensions are
/// preserved, which keeps feature indices stable and forces later components
/// onto disjoint supports.
pub fn deflate_strip(s: &DataMatrix, support: &[usize]) -> DataMatrix {
    s.zero_rows(support)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Deflation {
    Projection,
    Strip,
}

/// Source for [`multi_component`]: strip deflation needs the data matrix
/// itself, projection deflation works on any view.
#[derive(Debug, Clone)]
pub enum MatrixInput {
    Data { matrix: DataMatrix, scale: f64 },
    View(SymmetricMatrixView),
}

impl MatrixInput {
    pub fn view(&self) -> SymmetricMatrixView {
        match self {
            Self::Data { matrix, scale } => SymmetricMatrixView::implicit(matrix.clone(), *scale),
            Self::View(v) => v.clone(),
        }
    }

    pub fn dim(&self) -> usize {
        match self {
            Self::Data { matrix, .. } => matrix.n_features(),
            Self::View(v) => v.dim(),
        }
    }
}

#[derive(Debug, Clone)]
pub struct MultiComponentResult {
    pub components: Vec<SparsePrincipalComponent>,
    /// Each component's loadings scored on the *original* matrix.
    pub original_values: Vec<f64>,
    /// `Σ xᵢᵀ A xᵢ / Σ λᵢ(A)` over the first `L` eigenvalues of the
    /// original matrix.
    pub explained_variance_ratio: f64,
}

/// Extracts `count` sparse components, deflating between solves. The
/// explained-variance ratio is always measured against the original matrix.
pub fn multi_component(
    source: &MatrixInput,
    k: usize,
    count: usize,
    d: usize,
    deflation: Deflation,
    opts: &SolveOptions,
) -> Result<MultiComponentResult> {
    let n = source.dim();
    if count == 0 {
        return Err(Error::InvalidArgument("component count must be positive".into()));
    }
    if deflation == Deflation::Strip {
        if !matches!(source, MatrixInput::Data { .. }) {
            return Err(Error::InvalidArgument(
                "strip deflation requires a data matrix source".into(),
            ));
        }
        if count * k > n {
            return Err(Error::InvalidArgument(format!(
                "strip deflation needs L·k ≤ n (got {count}·{k} > {n})"
            )));
        }
    }

    let original = source.view();
    let top = top_eigenpairs(&original, count.min(n))?;
    let mut denom: f64 = top.values.iter().take(count).sum();
    if top.len() < count {
        // rank-deficient matrix: missing eigenvalues are zero
        denom += 0.0;
    }

    let mut components = Vec::with_capacity(count);
    let mut original_values = Vec::with_capacity(count);
    let mut data_state = match source {
        MatrixInput::Data { matrix, scale } => Some((matrix.clone(), *scale)),
        MatrixInput::View(_) => None,
    };
    let mut view = original.clone();

    for _ in 0..count {
        let pc = sparse_pca(&view, k, d, opts)?;
        original_values.push(original.quadratic_form(&pc.loadings)?);
        match deflation {
            Deflation::Projection => {
                view = deflate_projection(&view, &pc.loadings)?;
            }
            Deflation::Strip => {
                let (matrix, scale) = data_state.take().expect("strip requires data");
                let stripped = deflate_strip(&matrix, &pc.support);
                view = SymmetricMatrixView::implicit(stripped.clone(), scale);
                data_state = Some((stripped, scale));
            }
        }
        components.push(pc);
    }

    let explained_variance_ratio = if denom > 0.0 {
        (original_values.iter().sum::<f64>() / denom).clamp(0.0, 1.0)
    } else {
        0.0
    };
    Ok(MultiComponentResult { components, original_values, explained_variance_ratio })
}
