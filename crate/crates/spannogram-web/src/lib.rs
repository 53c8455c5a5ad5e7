//! Wasm bindings for the interactive demo page.
//!
//! Three operations back the page, all returning JSON strings so the page
//! stays framework-free: rank-2 spannogram curve data, a spiked-covariance
//! solve with recovery comparison, and an approximation-bound curve for a
//! synthetic power-law spectrum. Errors come back as `{"error": "..."}`.

use nalgebra::{DMatrix, DVector};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::Serialize;
use wasm_bindgen::prelude::*;

use spannogram::baselines::thresholding_pc;
use spannogram::experiments::{
    bound_curve, fit_power_law, make_spiked_model, sample_covariance,
};
use spannogram::solver::{sparse_pca, SolveOptions};
use spannogram::spannogram::{
    enumerate_candidates, intersection_vector, solve_rank_d_exact, LowRankFactor,
};
use spannogram::SymmetricMatrixView;

const PHI_SAMPLES: usize = 241;

#[derive(Serialize)]
struct SpannogramData {
    n: usize,
    k: usize,
    phi: Vec<f64>,
    /// `|v(φ)_i|` per row, sampled on `phi`.
    curves: Vec<Vec<f64>>,
    /// `k`-th largest curve value at each sample.
    boundary: Vec<f64>,
    intersections: Vec<Intersection>,
    supports: Vec<Vec<usize>>,
    best_support: Vec<usize>,
    best_value: f64,
}

#[derive(Serialize)]
struct Intersection {
    phi: f64,
    amplitude: f64,
    pair: [usize; 2],
    sign: i8,
}

fn err_json(message: impl std::fmt::Display) -> String {
    format!("{{\"error\":{}}}", serde_json::to_string(&message.to_string()).unwrap())
}

/// Angle of a rank-2 direction in `(−π/2, π/2]` with `c = (sin φ, cos φ)`.
fn phi_of(c: &DVector<f64>) -> f64 {
    let (mut s, mut t) = (c[0], c[1]);
    if t < 0.0 || (t == 0.0 && s < 0.0) {
        s = -s;
        t = -t;
    }
    s.atan2(t)
}

/// Rank-2 spannogram of a seeded random factor: curve samples, the top-`k`
/// boundary, all pairwise intersection points, and the candidate supports.
#[wasm_bindgen]
pub fn rank2_spannogram_json(n: u32, k: u32, seed: u32) -> String {
    let n = n as usize;
    let k = k as usize;
    if !(2..=16).contains(&n) {
        return err_json("n must be in 2..=16 for the demo");
    }
    if k == 0 || k > n {
        return err_json(format!("k must be in 1..={n}"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed as u64);
    // mild spectral decay keeps the curves visually separated
    let v: DMatrix<f64> = DMatrix::from_fn(n, 2, |_, j| {
        let x: f64 = StandardNormal.sample(&mut rng);
        x * if j == 0 { 1.0 } else { 0.7 }
    });
    let factor = match LowRankFactor::new(v, false) {
        Ok(f) => f,
        Err(e) => return err_json(e),
    };

    let phi: Vec<f64> = (0..PHI_SAMPLES)
        .map(|s| -std::f64::consts::FRAC_PI_2 + std::f64::consts::PI * s as f64 / (PHI_SAMPLES - 1) as f64)
        .collect();
    let mut curves = vec![vec![0.0; PHI_SAMPLES]; n];
    let mut boundary = vec![0.0; PHI_SAMPLES];
    for (s, &angle) in phi.iter().enumerate() {
        let c = DVector::from_vec(vec![angle.sin(), angle.cos()]);
        let values = factor.curve_values(&c);
        let mut column: Vec<f64> = (0..n).map(|i| values[i].abs()).collect();
        for i in 0..n {
            curves[i][s] = column[i];
        }
        column.sort_by(|a, b| b.partial_cmp(a).unwrap());
        boundary[s] = column[k - 1];
    }

    let mut intersections = Vec::new();
    for i in 0..n {
        for j in (i + 1)..n {
            for sign in [1i8, -1] {
                if let Ok(c) = intersection_vector(&factor, &[i, j], &[sign]) {
                    let amplitude = factor.curve_values(&c)[i].abs();
                    intersections.push(Intersection {
                        phi: phi_of(&c),
                        amplitude,
                        pair: [i, j],
                        sign,
                    });
                }
            }
        }
    }
    intersections.sort_by(|a, b| a.phi.partial_cmp(&b.phi).unwrap());

    let supports = match enumerate_candidates(&factor, k, seed as u64) {
        Ok(set) => set.supports().map(|s| s.to_vec()).collect::<Vec<_>>(),
        Err(e) => return err_json(e),
    };
    let best = match solve_rank_d_exact(&factor, k, seed as u64) {
        Ok(sol) => sol,
        Err(e) => return err_json(e),
    };

    serde_json::to_string(&SpannogramData {
        n,
        k,
        phi,
        curves,
        boundary,
        intersections,
        supports,
        best_support: best.support,
        best_value: best.value,
    })
    .unwrap_or_else(err_json)
}

#[derive(Serialize)]
struct SpikedSolve {
    n: usize,
    m: usize,
    k: usize,
    d: usize,
    planted_support_1: Vec<usize>,
    planted_support_2: Vec<usize>,
    support: Vec<usize>,
    loadings: Vec<f64>,
    value: f64,
    epsilon_d: f64,
    ratio_lower: f64,
    recovered: bool,
    thresholding_support: Vec<usize>,
    thresholding_recovered: bool,
    retained_features: usize,
    candidates: usize,
}

/// Draws a spiked-covariance sample and solves for the first sparse PC,
/// comparing the spannogram solver against plain thresholding.
#[wasm_bindgen]
pub fn spiked_solve_json(n: u32, m: u32, k: u32, d: u32, seed: u32) -> String {
    let (n, m, k, d) = (n as usize, m as usize, k as usize, d as usize);
    if n > 2000 || m == 0 || m > 500 {
        return err_json("demo limits: n ≤ 2000, 1 ≤ m ≤ 500");
    }
    let model = match make_spiked_model(n, seed as u64) {
        Ok(m) => m,
        Err(e) => return err_json(e),
    };
    let a = sample_covariance(&model, m, seed as u64 ^ 0x5eed);
    let pc = match sparse_pca(&a, k, d, &SolveOptions { seed: seed as u64, ..Default::default() })
    {
        Ok(pc) => pc,
        Err(e) => return err_json(e),
    };
    let th = match thresholding_pc(&a, k) {
        Ok(t) => t,
        Err(e) => return err_json(e),
    };
    let recovered = pc.support == model.support1;
    let thresholding_recovered = th.support == model.support1;
    serde_json::to_string(&SpikedSolve {
        n,
        m,
        k,
        d,
        planted_support_1: model.support1.clone(),
        planted_support_2: model.support2.clone(),
        support: pc.support.clone(),
        loadings: pc.loadings.iter().copied().collect(),
        value: pc.value,
        epsilon_d: pc.bound.epsilon_d,
        ratio_lower: pc.bound.ratio_lower,
        recovered,
        thresholding_support: th.support,
        thresholding_recovered,
        retained_features: pc.retained_features,
        candidates: pc.candidates,
    })
    .unwrap_or_else(err_json)
}

#[derive(Serialize)]
struct BoundCurveData {
    alpha: f64,
    fitted_alpha: f64,
    fit_r2: f64,
    rows: Vec<BoundRow>,
}

#[derive(Serialize)]
struct BoundRow {
    d: usize,
    epsilon_d: f64,
    ratio_lower: f64,
    term_spectral: f64,
    term_diagonal: f64,
}

/// Guarantee curve `1 − ε_d` for a synthetic power-law spectrum
/// `λ_i = C·i^{−α}`, with the exponent re-fitted from the spectrum.
#[wasm_bindgen]
pub fn bound_curve_json(alpha: f64, n: u32, k: u32, dmax: u32) -> String {
    let (n, k, dmax) = (n as usize, k as usize, dmax as usize);
    if !alpha.is_finite() || alpha <= 0.0 || !(4..=5000).contains(&n) || k == 0 || k > n || dmax == 0 || dmax >= n {
        return err_json("need alpha > 0, 4 ≤ n ≤ 5000, 1 ≤ k ≤ n, 1 ≤ dmax < n");
    }
    let diag: Vec<f64> = (1..=n).map(|i| 3.0 * (i as f64).powf(-alpha)).collect();
    let fit = match fit_power_law(&diag, 1, n) {
        Ok(f) => f,
        Err(e) => return err_json(e),
    };
    let a = match SymmetricMatrixView::dense(DMatrix::from_diagonal(&DVector::from_vec(
        diag.clone(),
    ))) {
        Ok(a) => a,
        Err(e) => return err_json(e),
    };
    let rows = match bound_curve(&a, k, dmax) {
        Ok(curve) => curve
            .into_iter()
            .map(|b| BoundRow {
                d: b.d,
                epsilon_d: b.epsilon_d,
                ratio_lower: b.ratio_lower,
                term_spectral: b.term_spectral,
                term_diagonal: b.term_diagonal,
            })
            .collect(),
        Err(e) => return err_json(e),
    };
    serde_json::to_string(&BoundCurveData { alpha, fitted_alpha: fit.alpha, fit_r2: fit.r2, rows })
        .unwrap_or_else(err_json)
}
