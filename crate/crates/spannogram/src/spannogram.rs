//! Candidate-support enumeration on a rank-`d` factor.
//!
//! For `A_d = V Vᵀ` with `V` an `n × d` factor, every unit vector `c` induces
//! a curve vector `V c`; the support of the `k` largest-magnitude entries is
//! piecewise constant in `c` and can only change where `d` curves tie. The
//! enumeration therefore solves one `(d−1) × d` nullspace system per index
//! tuple and sign pattern, ranks the resulting curve values, and expands the
//! tied block both ways. The union over all tuples is guaranteed to contain
//! every support that is optimal for `A_d`.

use std::collections::BTreeMap;

use itertools::Itertools;
use nalgebra::{DMatrix, DVector};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::eigen::{normalize_sign, EigenPairs};
use crate::error::{Error, Result};
use crate::parallel::map_collect;
use crate::tol;

/// `n × d` factor with columns `√λ_i · v_i`, so `A_d = V Vᵀ`. Row `i` is the
/// coefficient vector of curve `i`; its norm is the curve's peak amplitude.
#[derive(Debug, Clone)]
pub struct LowRankFactor {
    v: DMatrix<f64>,
    nonneg: bool,
}

impl LowRankFactor {
    /// Wraps an explicit factor. `nonneg` asserts that `V Vᵀ` is entrywise
    /// nonnegative, enabling the single-sign-pattern fast path.
    pub fn new(v: DMatrix<f64>, nonneg: bool) -> Result<Self> {
        if v.ncols() == 0 || v.nrows() == 0 {
            return Err(Error::InvalidArgument("factor must be nonempty".into()));
        }
        Ok(Self { v, nonneg })
    }

    /// Builds the factor from leading eigenpairs, dropping zero eigenvalues.
    pub fn from_eigenpairs(pairs: &EigenPairs, nonneg: bool) -> Result<Self> {
        let n = pairs.vectors.nrows();
        let kept: Vec<usize> = (0..pairs.len()).filter(|&i| pairs.values[i] > 0.0).collect();
        if kept.is_empty() {
            return Err(Error::InvalidArgument(
                "matrix has no positive spectral mass; the sparse PC is trivial".into(),
            ));
        }
        let mut v = DMatrix::zeros(n, kept.len());
        for (col, &i) in kept.iter().enumerate() {
            v.set_column(col, &(pairs.vectors.column(i) * pairs.values[i].sqrt()));
        }
        Ok(Self { v, nonneg })
    }

    pub fn n(&self) -> usize {
        self.v.nrows()
    }

    pub fn d(&self) -> usize {
        self.v.ncols()
    }

    pub fn nonneg(&self) -> bool {
        self.nonneg
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.v
    }

    pub fn row_norm(&self, i: usize) -> f64 {
        self.v.row(i).norm()
    }

    /// `λ₁(A_d)`, read off the first column (columns are `√λ_i v_i`).
    pub fn lambda1(&self) -> f64 {
        self.v.column(0).norm_squared()
    }

    /// Curve values `V c` at a direction `c`.
    pub fn curve_values(&self, c: &DVector<f64>) -> DVector<f64> {
        &self.v * c
    }

    /// Factor restricted to the given rows (row order preserved).
    pub fn restrict_rows(&self, rows: &[usize]) -> Result<Self> {
        for &r in rows {
            if r >= self.n() {
                return Err(Error::IndexOutOfRange { index: r, n: self.n() });
            }
        }
        Ok(Self { v: self.v.select_rows(rows.iter()), nonneg: self.nonneg })
    }

    /// Dense `V Vᵀ` (test and small-instance helper).
    pub fn covariance(&self) -> DMatrix<f64> {
        &self.v * self.v.transpose()
    }
}

/// Where a candidate support came from: the generating index tuple, the sign
/// pattern of its intersection system, and the ranking orientation (`-1` is
/// the mirrored ranking used for signed, nonnegative enumeration).
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct Origin {
    pub tuple: Vec<usize>,
    pub signs: Vec<i8>,
    pub orientation: i8,
}

/// Deduplicated candidate supports, ordered lexicographically; each support
/// is a sorted set of exactly `k` indices.
#[derive(Debug, Clone)]
pub struct CandidateSupportSet {
    k: usize,
    supports: BTreeMap<Vec<usize>, Origin>,
    systems_solved: usize,
}

impl CandidateSupportSet {
    fn new(k: usize) -> Self {
        Self { k, supports: BTreeMap::new(), systems_solved: 0 }
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn len(&self) -> usize {
        self.supports.len()
    }

    pub fn is_empty(&self) -> bool {
        self.supports.is_empty()
    }

    /// Supports in lexicographic order.
    pub fn supports(&self) -> impl Iterator<Item = &[usize]> + '_ {
        self.supports.keys().map(|s| s.as_slice())
    }

    pub fn contains(&self, support: &[usize]) -> bool {
        self.supports.contains_key(support)
    }

    pub fn origin(&self, support: &[usize]) -> Option<&Origin> {
        self.supports.get(support)
    }

    /// Number of intersection systems solved while building the set.
    pub fn systems_solved(&self) -> usize {
        self.systems_solved
    }

    /// Lifts supports produced on a reduced factor back to original row
    /// indices: entry `i` becomes `map[i]`. `map` must be ascending, so
    /// supports stay sorted.
    pub fn map_indices(&self, map: &[usize]) -> Self {
        let mut out = Self::new(self.k);
        out.systems_solved = self.systems_solved;
        for (s, o) in &self.supports {
            let mapped: Vec<usize> = s.iter().map(|&i| map[i]).collect();
            let origin = Origin {
                tuple: o.tuple.iter().map(|&i| map[i]).collect(),
                signs: o.signs.clone(),
                orientation: o.orientation,
            };
            out.insert(mapped, origin);
        }
        out
    }

    fn insert(&mut self, support: Vec<usize>, origin: Origin) {
        debug_assert_eq!(support.len(), self.k);
        match self.supports.entry(support) {
            std::collections::btree_map::Entry::Vacant(e) => {
                e.insert(origin);
            }
            std::collections::btree_map::Entry::Occupied(mut e) => {
                if origin < *e.get() {
                    e.insert(origin);
                }
            }
        }
    }
}

/// Indices `0..n` ordered by `w` descending, ties by index ascending.
fn ranking_desc(w: &[f64]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..w.len()).collect();
    order.sort_by(|&a, &b| w[b].partial_cmp(&w[a]).unwrap().then(a.cmp(&b)));
    order
}

/// Candidate supports of a rank-1 factor given by the single column `v`.
///
/// With mixed signs (`p = 0`) the optimum keeps the `k` largest magnitudes:
/// one support. For a nonnegative matrix (`p = 1`) the optimum is single
/// signed, so the top `k` and bottom `k` of the signed ordering both qualify.
pub fn rank1_candidates(v: &[f64], k: usize, nonneg: bool) -> Result<CandidateSupportSet> {
    let n = v.len();
    if k == 0 || k > n {
        return Err(Error::SparsityOutOfRange { k, n });
    }
    let mut set = CandidateSupportSet::new(k);
    if nonneg {
        let order = ranking_desc(v);
        let mut top: Vec<usize> = order[..k].to_vec();
        top.sort_unstable();
        let mut bottom: Vec<usize> = order[n - k..].to_vec();
        bottom.sort_unstable();
        set.insert(top, Origin { tuple: vec![], signs: vec![], orientation: 1 });
        set.insert(bottom, Origin { tuple: vec![], signs: vec![], orientation: -1 });
    } else {
        let mags: Vec<f64> = v.iter().map(|x| x.abs()).collect();
        let order = ranking_desc(&mags);
        let mut top: Vec<usize> = order[..k].to_vec();
        top.sort_unstable();
        set.insert(top, Origin { tuple: vec![], signs: vec![], orientation: 1 });
    }
    Ok(set)
}

/// Solves the intersection system for one index tuple: returns the unit
/// vector `c` spanning the nullspace of the `(d−1) × d` matrix with rows
/// `row_{i₁} − b_j · row_{i_{j+1}}`.
///
/// The sign of `c` is fixed by making its first non-negligible entry
/// positive. A [`Error::DegenerateIntersection`] signals that the nullspace
/// is not one-dimensional and the caller should perturb the factor.
pub fn intersection_vector(
    factor: &LowRankFactor,
    tuple: &[usize],
    signs: &[i8],
) -> Result<DVector<f64>> {
    let d = factor.d();
    if tuple.len() != d || signs.len() + 1 != d {
        return Err(Error::InvalidArgument(format!(
            "expected {} tuple indices and {} signs, got {} and {}",
            d,
            d - 1,
            tuple.len(),
            signs.len()
        )));
    }
    let mut seen = tuple.to_vec();
    seen.sort_unstable();
    seen.dedup();
    if seen.len() != d {
        return Err(Error::InvalidArgument("tuple indices must be distinct".into()));
    }
    for &i in tuple {
        if i >= factor.n() {
            return Err(Error::IndexOutOfRange { index: i, n: factor.n() });
        }
    }
    if signs.iter().any(|&b| b != 1 && b != -1) {
        return Err(Error::InvalidArgument("signs must be ±1".into()));
    }

    // assemble the system padded with a zero row so the full set of right
    // singular vectors (including the null direction) is available
    let mut m = DMatrix::zeros(d, d);
    for j in 0..(d - 1) {
        for col in 0..d {
            m[(j, col)] =
                factor.matrix()[(tuple[0], col)] - signs[j] as f64 * factor.matrix()[(tuple[j + 1], col)];
        }
    }
    let row_scale = tuple.iter().map(|&i| factor.row_norm(i)).fold(0.0f64, f64::max);

    let svd = m.svd(true, true);
    let v_t = svd.v_t.as_ref().expect("svd with vectors");
    let mut order: Vec<usize> = (0..d).collect();
    order.sort_by(|&a, &b| svd.singular_values[b].partial_cmp(&svd.singular_values[a]).unwrap());
    let s_max = svd.singular_values[order[0]];
    // order[d-1] is the structural zero from the padding row; order[d-2] is
    // the smallest singular value of the actual (d−1)×d system
    let degenerate = s_max <= 1e-14 * row_scale.max(1e-300)
        || (d >= 3 && svd.singular_values[order[d - 2]] < tol::DEGENERACY * s_max);
    if degenerate {
        return Err(Error::DegenerateIntersection { tuple: tuple.to_vec() });
    }
    let mut c: DVector<f64> = v_t.row(order[d - 1]).transpose();
    c /= c.norm();
    for i in 0..d {
        if c[i].abs() > 1e-12 {
            if c[i] < 0.0 {
                c = -c;
            }
            break;
        }
    }
    Ok(c)
}

/// Expands the `d`-way tie at an intersection into every support that is
/// locally optimal on some side of it.
///
/// `w` is the ranking vector (absolute or signed curve values) whose `tuple`
/// entries are tied. With `r` tuple indices inside the top `k`, the top
/// `k − r` non-tuple entries are combined with every `r`-subset of the tuple.
pub fn expand_tie_supports(w: &[f64], tuple: &[usize], k: usize) -> Result<Vec<Vec<usize>>> {
    let n = w.len();
    if k == 0 || k > n {
        return Err(Error::SparsityOutOfRange { k, n });
    }
    for &i in tuple {
        if i >= n {
            return Err(Error::IndexOutOfRange { index: i, n });
        }
    }
    let order = ranking_desc(w);
    let in_tuple = |i: usize| tuple.contains(&i);
    let r = order[..k].iter().filter(|&&i| in_tuple(i)).count();
    if r == tuple.len() {
        let mut top: Vec<usize> = order[..k].to_vec();
        top.sort_unstable();
        return Ok(vec![top]);
    }
    let base: Vec<usize> = order.iter().copied().filter(|&i| !in_tuple(i)).take(k - r).collect();
    let mut sorted_tuple = tuple.to_vec();
    sorted_tuple.sort_unstable();
    let mut out = Vec::new();
    for subset in sorted_tuple.iter().copied().combinations(r) {
        let mut support = base.clone();
        support.extend(subset);
        support.sort_unstable();
        out.push(support);
    }
    Ok(out)
}

/// Seeded perturbation that breaks curve-intersection degeneracies.
///
/// Entries are uniform in `[−ε, ε]` with
/// `ε = min(1 / (√(λ₁·n·d)·ln n), 1e−8·√λ₁)`, small enough that the
/// objective of any unit vector moves by at most `3·√(λ₁·λ₁(EEᵀ))`.
pub fn perturb(factor: &LowRankFactor, seed: u64) -> LowRankFactor {
    let n = factor.n();
    let d = factor.d();
    if n < 2 {
        return factor.clone();
    }
    let lambda1 = factor.lambda1();
    let eps = if lambda1 > 0.0 {
        (1.0 / ((lambda1 * n as f64 * d as f64).sqrt() * (n as f64).ln()))
            .min(1e-8 * lambda1.sqrt())
    } else {
        1e-12
    };
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut v = factor.matrix().clone();
    for j in 0..d {
        for i in 0..n {
            let u: f64 = rand::Rng::random(&mut rng);
            v[(i, j)] += (2.0 * u - 1.0) * eps;
        }
    }
    LowRankFactor { v, nonneg: factor.nonneg }
}

/// Exposed for tests: the ε used by [`perturb`].
pub fn perturbation_epsilon(lambda1: f64, n: usize, d: usize) -> f64 {
    (1.0 / ((lambda1 * n as f64 * d as f64).sqrt() * (n as f64).ln())).min(1e-8 * lambda1.sqrt())
}

fn sign_patterns(d: usize, nonneg: bool) -> Vec<Vec<i8>> {
    if nonneg {
        return vec![vec![1; d - 1]];
    }
    (0..(1usize << (d - 1)))
        .map(|mask| (0..(d - 1)).map(|j| if mask >> j & 1 == 1 { -1 } else { 1 }).collect())
        .collect()
}

pub(crate) fn enumerate_once(factor: &LowRankFactor, k: usize) -> Result<CandidateSupportSet> {
    let n = factor.n();
    let d = factor.d();
    let mut set = CandidateSupportSet::new(k);
    if k == n {
        set.insert((0..n).collect(), Origin { tuple: vec![], signs: vec![], orientation: 1 });
        return Ok(set);
    }
    if d == 1 {
        let col: Vec<f64> = factor.matrix().column(0).iter().copied().collect();
        return rank1_candidates(&col, k, factor.nonneg());
    }
    let patterns = sign_patterns(d, factor.nonneg());
    let tuples: Vec<Vec<usize>> = (0..n).combinations(d).collect();

    type TupleYield = Result<Vec<(Vec<usize>, Origin)>>;
    let per_tuple: Vec<TupleYield> = map_collect(&tuples, |tuple| {
        let mut local = Vec::new();
        for signs in &patterns {
            let c = intersection_vector(factor, tuple, signs)?;
            let curve = factor.curve_values(&c);
            if factor.nonneg() {
                // nonnegative matrices rank signed values; both orientations
                // of the nullspace vector delimit distinct candidate sets
                for orientation in [1i8, -1i8] {
                    let w: Vec<f64> =
                        curve.iter().map(|&x| x * orientation as f64).collect();
                    for support in expand_tie_supports(&w, tuple, k)? {
                        local.push((
                            support,
                            Origin { tuple: tuple.clone(), signs: signs.clone(), orientation },
                        ));
                    }
                }
            } else {
                let w: Vec<f64> = curve.iter().map(|x| x.abs()).collect();
                for support in expand_tie_supports(&w, tuple, k)? {
                    local.push((
                        support,
                        Origin { tuple: tuple.clone(), signs: signs.clone(), orientation: 1 },
                    ));
                }
            }
        }
        Ok(local)
    });

    for result in per_tuple {
        for (support, origin) in result? {
            set.insert(support, origin);
        }
    }
    set.systems_solved = tuples.len() * patterns.len();
    Ok(set)
}

/// Builds the full candidate support set for the factor.
///
/// Degenerate intersections trigger one automatic global perturbation
/// (seeded by `seed`) and a full retry; a second failure propagates.
pub fn enumerate_candidates(
    factor: &LowRankFactor,
    k: usize,
    seed: u64,
) -> Result<CandidateSupportSet> {
    validate_enumeration(factor.n(), factor.d(), k)?;
    match enumerate_once(factor, k) {
        Ok(set) => Ok(set),
        Err(Error::DegenerateIntersection { .. }) => enumerate_once(&perturb(factor, seed), k),
        Err(e) => Err(e),
    }
}

pub(crate) fn validate_enumeration(n: usize, d: usize, k: usize) -> Result<()> {
    if k == 0 || k > n {
        return Err(Error::SparsityOutOfRange { k, n });
    }
    if d == 0 {
        return Err(Error::RankOutOfRange { d, cap: tol::RANK_CAP });
    }
    if d > tol::RANK_CAP {
        return Err(Error::RankOutOfRange { d, cap: tol::RANK_CAP });
    }
    if d > n {
        return Err(Error::RankOutOfRange { d, cap: n });
    }
    Ok(())
}

/// Exact sparse principal component of `A_d = V Vᵀ`.
#[derive(Debug, Clone)]
pub struct RankDSolution {
    pub support: Vec<usize>,
    pub loadings: DVector<f64>,
    pub value: f64,
}

/// Best value of a single support on the factor: `λ_max(V_I V_Iᵀ)` through
/// the `d × d` slice Gram matrix, with the matching loading vector.
pub fn evaluate_support(factor: &LowRankFactor, support: &[usize]) -> (f64, DVector<f64>) {
    let d = factor.d();
    let slice = factor.matrix().select_rows(support.iter());
    let gram = slice.transpose() * &slice;
    let eig = gram.symmetric_eigen();
    let mut best = 0usize;
    for i in 1..d {
        if eig.eigenvalues[i] > eig.eigenvalues[best] {
            best = i;
        }
    }
    let value = eig.eigenvalues[best].max(0.0);
    let local = &slice * eig.eigenvectors.column(best).into_owned();
    let mut x = DVector::zeros(factor.n());
    let norm = local.norm();
    if norm > 0.0 {
        for (slot, &i) in support.iter().enumerate() {
            x[i] = local[slot] / norm;
        }
    } else {
        x[support[0]] = 1.0;
    }
    normalize_sign(&mut x);
    (value, x)
}

/// Solves sparse PCA on `A_d = V Vᵀ` exactly: enumerates candidates and
/// returns the best support with its closed-form loadings and value. Values
/// are always measured on the input factor, even if candidate generation
/// needed a perturbation retry. Exact ties go to the lexicographically
/// smallest support.
pub fn solve_rank_d_exact(factor: &LowRankFactor, k: usize, seed: u64) -> Result<RankDSolution> {
    let set = enumerate_candidates(factor, k, seed)?;
    let supports: Vec<Vec<usize>> = set.supports().map(|s| s.to_vec()).collect();
    let scored: Vec<f64> = map_collect(&supports, |s| evaluate_support(factor, s).0);
    let mut best = 0usize;
    for i in 1..supports.len() {
        if scored[i] > scored[best] {
            best = i;
        }
    }
    let (value, loadings) = evaluate_support(factor, &supports[best]);
    Ok(RankDSolution { support: supports[best].clone(), loadings, value })
}
