//! Desk-scale experiment harness: spiked-covariance support recovery,
//! power-law spectrum fitting, and bound-versus-rank curves.

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::baselines::{thresholding_pc, truncated_power_method, TPowerInit};
use crate::eigen::top_eigenpairs;
use crate::error::{Error, Result};
use crate::matrix::SymmetricMatrixView;
use crate::parallel::map_collect;
use crate::solver::{approximation_bound, deflate_projection, sparse_pca, BoundReport, SolveOptions};
use crate::sparse::DataMatrix;

/// Planted spike eigenvalues; the bulk sits at 1.
pub const SPIKE_LAMBDA_1: f64 = 400.0;
pub const SPIKE_LAMBDA_2: f64 = 300.0;
/// Nonzeros per planted eigenvector.
pub const SPIKE_SUPPORT_SIZE: usize = 10;

/// Covariance with two sparse planted eigenvectors:
/// `Σ = λ₁ v₁v₁ᵀ + λ₂ v₂v₂ᵀ + (I − v₁v₁ᵀ − v₂v₂ᵀ)`, spectrum
/// `(400, 300, 1, …, 1)`.
#[derive(Debug, Clone)]
pub struct SpikedModel {
    pub n: usize,
    pub v1: DVector<f64>,
    pub v2: DVector<f64>,
    /// Sorted support of `v1`.
    pub support1: Vec<usize>,
    /// Sorted support of `v2`, disjoint from `support1`.
    pub support2: Vec<usize>,
}

impl SpikedModel {
    /// Dense realization of `Σ` (test/verification helper).
    pub fn sigma_dense(&self) -> DMatrix<f64> {
        let mut sigma = DMatrix::identity(self.n, self.n);
        sigma += &self.v1 * self.v1.transpose() * (SPIKE_LAMBDA_1 - 1.0);
        sigma += &self.v2 * self.v2.transpose() * (SPIKE_LAMBDA_2 - 1.0);
        sigma
    }

    pub fn trace(&self) -> f64 {
        SPIKE_LAMBDA_1 + SPIKE_LAMBDA_2 + (self.n as f64 - 2.0)
    }
}

/// Plants two disjoint 10-sparse eigenvectors with entries `±1/√10` on
/// seeded random index sets; the rest of the spectrum is the flat unit bulk
/// on the orthogonal complement.
pub fn make_spiked_model(n: usize, seed: u64) -> Result<SpikedModel> {
    if n < 2 * SPIKE_SUPPORT_SIZE + 1 {
        return Err(Error::InvalidArgument(format!(
            "spiked model needs n ≥ {}, got {n}",
            2 * SPIKE_SUPPORT_SIZE + 1
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    // Fisher–Yates prefix for 20 distinct indices
    let mut pool: Vec<usize> = (0..n).collect();
    for i in 0..(2 * SPIKE_SUPPORT_SIZE) {
        let j = i + (rng.random::<u64>() as usize) % (n - i);
        pool.swap(i, j);
    }
    let mut support1: Vec<usize> = pool[..SPIKE_SUPPORT_SIZE].to_vec();
    let mut support2: Vec<usize> = pool[SPIKE_SUPPORT_SIZE..2 * SPIKE_SUPPORT_SIZE].to_vec();
    support1.sort_unstable();
    support2.sort_unstable();

    let amp = 1.0 / (SPIKE_SUPPORT_SIZE as f64).sqrt();
    let mut v1 = DVector::zeros(n);
    for &i in &support1 {
        v1[i] = if rng.random::<bool>() { amp } else { -amp };
    }
    let mut v2 = DVector::zeros(n);
    for &i in &support2 {
        v2[i] = if rng.random::<bool>() { amp } else { -amp };
    }
    Ok(SpikedModel { n, v1, v2, support1, support2 })
}

/// Draws `m` zero-mean Gaussian samples with covariance `Σ` as the columns
/// of an `n × m` data matrix. Uses
/// `Σ^{1/2} g = g + (√λ₁−1)(v₁ᵀg)v₁ + (√λ₂−1)(v₂ᵀg)v₂`, so no dense `Σ` is
/// formed. The sample covariance convention is `(1/m)·S Sᵀ`.
pub fn sample_gaussian(model: &SpikedModel, m: usize, seed: u64) -> DataMatrix {
    let n = model.n;
    let a1 = SPIKE_LAMBDA_1.sqrt() - 1.0;
    let a2 = SPIKE_LAMBDA_2.sqrt() - 1.0;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut s = DMatrix::zeros(n, m);
    for j in 0..m {
        let g = DVector::from_fn(n, |_, _| StandardNormal.sample(&mut rng));
        let c1 = model.v1.dot(&g);
        let c2 = model.v2.dot(&g);
        let x = &g + &model.v1 * (a1 * c1) + &model.v2 * (a2 * c2);
        s.set_column(j, &x);
    }
    DataMatrix::from_dense(&s)
}

/// Sample covariance view `(1/m)·S Sᵀ` for a draw from the model.
pub fn sample_covariance(model: &SpikedModel, m: usize, seed: u64) -> SymmetricMatrixView {
    let s = sample_gaussian(model, m, seed);
    SymmetricMatrixView::implicit(s, 1.0 / m as f64)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RecoveryMethod {
    Thresholding,
    TruncatedPower,
    Spannogram { d: usize },
}

impl RecoveryMethod {
    pub fn label(&self) -> String {
        match self {
            Self::Thresholding => "thresholding".into(),
            Self::TruncatedPower => "tpower".into(),
            Self::Spannogram { d } => format!("rank-{d}"),
        }
    }
}

#[derive(Debug, Clone)]
pub struct RecoveryConfig {
    pub n: usize,
    pub m: usize,
    pub k: usize,
    pub trials: usize,
    pub seed: u64,
    pub methods: Vec<RecoveryMethod>,
    pub tpower_iters: usize,
}

impl Default for RecoveryConfig {
    fn default() -> Self {
        Self {
            n: 500,
            m: 50,
            k: 10,
            trials: 200,
            seed: 0,
            methods: vec![
                RecoveryMethod::Thresholding,
                RecoveryMethod::TruncatedPower,
                RecoveryMethod::Spannogram { d: 2 },
            ],
            tpower_iters: 10_000,
        }
    }
}

#[derive(Debug, Clone)]
pub struct RecoveryReport {
    pub config: RecoveryConfig,
    /// Successful trials per method, aligned with `config.methods`.
    pub successes: Vec<usize>,
}

impl RecoveryReport {
    pub fn p_rec(&self, method_index: usize) -> f64 {
        self.successes[method_index] as f64 / self.config.trials as f64
    }
}

fn estimate_support(
    method: RecoveryMethod,
    a: &SymmetricMatrixView,
    k: usize,
    tpower_iters: usize,
    seed: u64,
) -> Result<(Vec<usize>, DVector<f64>)> {
    match method {
        RecoveryMethod::Thresholding => {
            let r = thresholding_pc(a, k)?;
            Ok((r.support, r.loadings))
        }
        RecoveryMethod::TruncatedPower => {
            let r = truncated_power_method(a, k, tpower_iters, TPowerInit::TopVariance)?;
            Ok((r.support, r.loadings))
        }
        RecoveryMethod::Spannogram { d } => {
            let pc = sparse_pca(a, k, d, &SolveOptions { seed, ..SolveOptions::default() })?;
            Ok((pc.support, pc.loadings))
        }
    }
}

/// Spiked-covariance recovery: per trial, draw `m` samples, estimate the
/// first sparse PC, projection-deflate, estimate the second; a trial
/// succeeds for a method when its two supports match the planted pair as an
/// unordered set. Trials use seeds derived from the master seed, so the
/// result is independent of how they are scheduled.
pub fn recovery_experiment(config: &RecoveryConfig) -> Result<RecoveryReport> {
    if config.trials == 0 {
        return Err(Error::InvalidArgument("trials must be positive".into()));
    }
    let model = make_spiked_model(config.n, config.seed)?;
    let planted: [&[usize]; 2] = [&model.support1, &model.support2];
    let trials: Vec<usize> = (0..config.trials).collect();

    let outcomes: Vec<Result<Vec<bool>>> = map_collect(&trials, |&trial| {
        let trial_seed =
            config.seed.wrapping_add((trial as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15));
        let a = sample_covariance(&model, config.m, trial_seed);
        let mut flags = Vec::with_capacity(config.methods.len());
        for &method in &config.methods {
            let (s1, x1) = estimate_support(method, &a, config.k, config.tpower_iters, trial_seed)?;
            let deflated = deflate_projection(&a, &x1)?;
            let (s2, _) =
                estimate_support(method, &deflated, config.k, config.tpower_iters, trial_seed)?;
            let hit = (s1 == planted[0] && s2 == planted[1])
                || (s1 == planted[1] && s2 == planted[0]);
            flags.push(hit);
        }
        Ok(flags)
    });

    let mut successes = vec![0usize; config.methods.len()];
    for outcome in outcomes {
        for (i, hit) in outcome?.into_iter().enumerate() {
            if hit {
                successes[i] += 1;
            }
        }
    }
    Ok(RecoveryReport { config: config.clone(), successes })
}

/// Least-squares power-law fit `λ_i ≈ C·i^{−α}` on log–log scale.
#[derive(Debug, Clone, Copy)]
pub struct PowerLawFit {
    pub c: f64,
    pub alpha: f64,
    pub r2: f64,
    /// Nonpositive eigenvalues excluded from the fit.
    pub excluded: usize,
}

/// Fits over 1-based index range `[lo, hi]` (inclusive) of the eigenvalue
/// list; requires at least three positive eigenvalues in range.
pub fn fit_power_law(eigenvalues: &[f64], lo: usize, hi: usize) -> Result<PowerLawFit> {
    if lo == 0 || hi < lo || hi > eigenvalues.len() {
        return Err(Error::InvalidArgument(format!(
            "fit range [{lo}, {hi}] invalid for {} eigenvalues",
            eigenvalues.len()
        )));
    }
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    let mut excluded = 0usize;
    for i in lo..=hi {
        let lambda = eigenvalues[i - 1];
        if lambda > 0.0 {
            xs.push((i as f64).ln());
            ys.push(lambda.ln());
        } else {
            excluded += 1;
        }
    }
    if xs.len() < 3 {
        return Err(Error::InvalidArgument(format!(
            "need at least 3 positive eigenvalues in range, got {}",
            xs.len()
        )));
    }
    let nf = xs.len() as f64;
    let mean_x = xs.iter().sum::<f64>() / nf;
    let mean_y = ys.iter().sum::<f64>() / nf;
    let mut sxx = 0.0;
    let mut sxy = 0.0;
    for i in 0..xs.len() {
        sxx += (xs[i] - mean_x) * (xs[i] - mean_x);
        sxy += (xs[i] - mean_x) * (ys[i] - mean_y);
    }
    let slope = sxy / sxx;
    let intercept = mean_y - slope * mean_x;
    let mut ss_res = 0.0;
    let mut ss_tot = 0.0;
    for i in 0..xs.len() {
        let fit = intercept + slope * xs[i];
        ss_res += (ys[i] - fit) * (ys[i] - fit);
        ss_tot += (ys[i] - mean_y) * (ys[i] - mean_y);
    }
    let r2 = if ss_tot > 0.0 { 1.0 - ss_res / ss_tot } else { 1.0 };
    Ok(PowerLawFit { c: intercept.exp(), alpha: -slope, r2, excluded })
}

/// Leading eigenvalues plus power-law fit and the largest diagonal element.
#[derive(Debug, Clone)]
pub struct SpectrumReport {
    pub eigenvalues: Vec<f64>,
    pub fit: PowerLawFit,
    pub lambda_1_diag: f64,
}

pub fn spectrum_report(
    a: &SymmetricMatrixView,
    count: usize,
    fit_lo: usize,
    fit_hi: usize,
) -> Result<SpectrumReport> {
    let pairs = top_eigenpairs(a, count.min(a.dim()))?;
    let mut eigenvalues = pairs.values;
    eigenvalues.resize(count.min(a.dim()), 0.0);
    let fit = fit_power_law(&eigenvalues, fit_lo, fit_hi.min(eigenvalues.len()))?;
    Ok(SpectrumReport { eigenvalues, fit, lambda_1_diag: a.max_diagonal() })
}

/// Approximation bound for every rank `d = 1..=d_max` on the same matrix.
/// `ε_d` is non-increasing in `d`.
pub fn bound_curve(a: &SymmetricMatrixView, k: usize, d_max: usize) -> Result<Vec<BoundReport>> {
    let n = a.dim();
    if d_max == 0 || d_max >= n {
        return Err(Error::InvalidArgument(format!(
            "d_max must be in [1, n-1] = [1, {}], got {d_max}",
            n - 1
        )));
    }
    let pairs = top_eigenpairs(a, (d_max + 1).min(n))?;
    let mut spectrum = pairs.values;
    spectrum.resize(d_max + 1, 0.0);
    let lambda_1_diag = a.max_diagonal();
    (1..=d_max)
        .map(|d| approximation_bound(&spectrum, d, lambda_1_diag, n, k))
        .collect()
}
