//! Safe feature elimination for a low-rank factor.
//!
//! Rows of `V` whose curve amplitude (row norm) provably stays below the
//! top-`k` boundary of the spannogram can never appear in an optimal support
//! of `A_d = V Vᵀ` and are discarded before enumeration. The boundary is
//! tracked through `P_k`: intersection amplitudes with exactly `k−1` working
//! curves above them — the local minima of the `k`-th level of the curve
//! arrangement. A row whose peak amplitude is below every point of `P_k`
//! cannot enter any top-`k` set, and neither can any lower-norm row.

use itertools::Itertools;
use nalgebra::DVector;

use crate::error::{Error, Result};
use crate::spannogram::{intersection_vector, rank1_candidates, LowRankFactor};

/// One tracked intersection point of the working arrangement.
#[derive(Debug, Clone)]
pub struct BoundaryPoint {
    /// Generating rows, original indices, ascending.
    pub tuple: Vec<usize>,
    /// Nullspace direction of the intersection system.
    pub direction: DVector<f64>,
    /// Curve value shared by the tuple at this point (absolute value for
    /// mixed-sign factors, signed in the given orientation otherwise).
    pub amplitude: f64,
    /// Ranking orientation; only meaningful for nonnegative factors.
    pub orientation: i8,
}

#[derive(Debug, Clone)]
pub struct EliminationResult {
    /// Retained original row indices, ascending. As a set this is a prefix
    /// of the norm-descending row ordering.
    pub retained: Vec<usize>,
    /// Factor restricted to `retained` (same order).
    pub reduced: LowRankFactor,
    /// Final `P_k`: boundary points, amplitude ascending.
    pub boundary: Vec<BoundaryPoint>,
}

impl EliminationResult {
    pub fn boundary_amplitudes(&self) -> Vec<f64> {
        self.boundary.iter().map(|p| p.amplitude).collect()
    }
}

struct TrackedPoint {
    tuple: Vec<usize>, // rank-space indices
    c: DVector<f64>,
    amplitude: f64,
    orientation: i8,
    above: usize, // working curves strictly above, tuple excluded
}

/// Screens the rows of `factor` for sparsity `k`.
///
/// Rows are processed in norm-descending order starting from a seed of
/// `k + d` rows; each admission solves only the intersection systems of
/// tuples containing the new row and updates the above-counts of every
/// tracked point. The scan stops at the first row whose norm falls strictly
/// below `min(P_k)`; that row and all lower-norm rows are discarded.
pub fn eliminate_features(factor: &LowRankFactor, k: usize) -> Result<EliminationResult> {
    let n = factor.n();
    let d = factor.d();
    if k == 0 || k > n {
        return Err(Error::SparsityOutOfRange { k, n });
    }

    if d == 1 {
        // the rank-1 candidates are known outright; retain their union
        let col: Vec<f64> = factor.matrix().column(0).iter().copied().collect();
        let set = rank1_candidates(&col, k, factor.nonneg())?;
        let mut retained: Vec<usize> = set.supports().flatten().copied().collect();
        retained.sort_unstable();
        retained.dedup();
        let reduced = factor.restrict_rows(&retained)?;
        return Ok(EliminationResult { retained, reduced, boundary: Vec::new() });
    }

    // norm-descending rank order, ties by index
    let norms: Vec<f64> = (0..n).map(|i| factor.row_norm(i)).collect();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| norms[b].partial_cmp(&norms[a]).unwrap().then(a.cmp(&b)));

    if k + d >= n {
        let retained: Vec<usize> = (0..n).collect();
        return Ok(EliminationResult {
            retained: retained.clone(),
            reduced: factor.restrict_rows(&retained)?,
            boundary: Vec::new(),
        });
    }

    let ranked = factor.restrict_rows(&order)?;
    let nonneg = factor.nonneg();
    let patterns: Vec<Vec<i8>> = if nonneg {
        vec![vec![1; d - 1]]
    } else {
        (0..(1usize << (d - 1)))
            .map(|mask| (0..(d - 1)).map(|j| if mask >> j & 1 == 1 { -1 } else { 1 }).collect())
            .collect()
    };

    let mut points: Vec<TrackedPoint> = Vec::new();
    let mut working = k + d;

    // curve value of ranked row `r` at direction `c`
    let curve_at = |r: usize, c: &DVector<f64>| ranked.matrix().row(r).transpose().dot(c);

    let solve_tuple = |points: &mut Vec<TrackedPoint>,
                           tuple: &[usize],
                           working: usize|
     -> Result<()> {
        for signs in &patterns {
            // degenerate tuples propagate: a missing boundary point could
            // raise min(P_k) and make a rejection unsafe, so the caller must
            // perturb the whole factor and redo the screening
            let c = match intersection_vector(&ranked, tuple, signs) {
                Ok(c) => c,
                Err(Error::DegenerateIntersection { .. }) => {
                    let mut original: Vec<usize> = tuple.iter().map(|&r| order[r]).collect();
                    original.sort_unstable();
                    return Err(Error::DegenerateIntersection { tuple: original });
                }
                Err(e) => return Err(e),
            };
            let tied = curve_at(tuple[0], &c);
            let orientations: &[i8] = if nonneg { &[1, -1] } else { &[1] };
            for &orientation in orientations {
                let amplitude = if nonneg { orientation as f64 * tied } else { tied.abs() };
                let mut above = 0usize;
                for r in 0..working {
                    if tuple.contains(&r) {
                        continue;
                    }
                    let v = curve_at(r, &c);
                    let v = if nonneg { orientation as f64 * v } else { v.abs() };
                    if v > amplitude {
                        above += 1;
                    }
                }
                points.push(TrackedPoint {
                    tuple: tuple.to_vec(),
                    c: c.clone(),
                    amplitude,
                    orientation,
                    above,
                });
            }
        }
        Ok(())
    };

    // seed: all tuples within the k + d highest-norm rows
    let seed_len = working;
    for tuple in (0..seed_len).combinations(d) {
        solve_tuple(&mut points, &tuple, working)?;
    }

    let mut stop = n;
    for t in seed_len..n {
        // reject iff the next row's peak amplitude is strictly below every
        // current boundary point; an empty P_k can reject nothing
        let min_pk = points
            .iter()
            .filter(|p| p.above == k - 1)
            .map(|p| p.amplitude)
            .fold(f64::INFINITY, f64::min);
        if min_pk.is_finite() && norms[order[t]] < min_pk {
            stop = t;
            break;
        }
        // admit row t: update every tracked point, then add the new tuples
        for p in points.iter_mut() {
            let v = curve_at(t, &p.c);
            let v = if nonneg { p.orientation as f64 * v } else { v.abs() };
            if v > p.amplitude {
                p.above += 1;
            }
        }
        working = t + 1;
        for mut rest in (0..t).combinations(d - 1) {
            rest.push(t);
            solve_tuple(&mut points, &rest, working)?;
        }
    }

    let mut retained: Vec<usize> = order[..stop].to_vec();
    retained.sort_unstable();
    let reduced = factor.restrict_rows(&retained)?;
    let mut boundary: Vec<BoundaryPoint> = points
        .into_iter()
        .filter(|p| p.above == k - 1)
        .map(|p| {
            let mut tuple: Vec<usize> = p.tuple.iter().map(|&r| order[r]).collect();
            tuple.sort_unstable();
            BoundaryPoint {
                tuple,
                direction: p.c,
                amplitude: p.amplitude,
                orientation: p.orientation,
            }
        })
        .collect();
    boundary.sort_by(|a, b| {
        a.amplitude.partial_cmp(&b.amplitude).unwrap().then(a.tuple.cmp(&b.tuple))
    });
    Ok(EliminationResult { retained, reduced, boundary })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spannogram::solve_rank_d_exact;
    use approx::assert_abs_diff_eq;
    use nalgebra::DMatrix;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use rand_distr::{Distribution, StandardNormal};

    fn random_factor(n: usize, d: usize, seed: u64) -> LowRankFactor {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let v = DMatrix::from_fn(n, d, |_, _| StandardNormal.sample(&mut rng));
        LowRankFactor::new(v, false).unwrap()
    }

    #[test]
    fn dominant_rows_screen_the_rest() {
        // two strong curves plus one mid curve; everything below the lowest
        // boundary intersection must go (k = 1, d = 2)
        let rows: Vec<[f64; 2]> = vec![
            [10.0, 0.0],
            [0.0, 9.0],
            [6.0, 0.5],
            [0.05, 0.02],
            [0.03, 0.01],
            [0.01, 0.005],
        ];
        let v = DMatrix::from_fn(6, 2, |i, j| rows[i][j]);
        let factor = LowRankFactor::new(v, false).unwrap();
        let result = eliminate_features(&factor, 1).unwrap();
        assert_eq!(result.retained, vec![0, 1, 2]);
        // the two row-0/row-1 crossings both sit at 90/√181
        let expected = 90.0 / 181.0f64.sqrt();
        let amps = result.boundary_amplitudes();
        assert_eq!(amps.len(), 2);
        for a in amps {
            assert_abs_diff_eq!(a, expected, epsilon = 1e-12);
        }
    }

    #[test]
    fn safety_on_random_factors() {
        for seed in 0..10 {
            let factor = random_factor(50, 2, seed);
            let k = 5;
            let full = solve_rank_d_exact(&factor, k, seed).unwrap();
            let result = eliminate_features(&factor, k).unwrap();
            let reduced_sol = solve_rank_d_exact(&result.reduced, k, seed).unwrap();
            let mapped: Vec<usize> =
                reduced_sol.support.iter().map(|&r| result.retained[r]).collect();
            assert_abs_diff_eq!(reduced_sol.value, full.value, epsilon = 1e-9);
            assert_eq!(mapped, full.support, "seed {seed}");
            for &i in &full.support {
                assert!(result.retained.contains(&i));
            }
        }
    }

    #[test]
    fn retained_is_norm_prefix() {
        let factor = random_factor(40, 2, 3);
        let result = eliminate_features(&factor, 4).unwrap();
        let mut norms: Vec<f64> = (0..40).map(|i| factor.row_norm(i)).collect();
        norms.sort_by(|a, b| b.partial_cmp(a).unwrap());
        let cutoff = norms[result.retained.len() - 1];
        for &i in &result.retained {
            assert!(factor.row_norm(i) >= cutoff - 1e-15);
        }
        assert!(result.retained.len() >= 4 + 2);
    }

    #[test]
    fn idempotent_on_reduced_factor() {
        let factor = random_factor(60, 2, 9);
        let first = eliminate_features(&factor, 5).unwrap();
        let second = eliminate_features(&first.reduced, 5).unwrap();
        assert_eq!(second.retained.len(), first.retained.len());
        assert_eq!(second.retained, (0..first.retained.len()).collect::<Vec<_>>());
    }

    #[test]
    fn boundary_points_have_exactly_k_minus_1_curves_above() {
        let factor = random_factor(30, 2, 11);
        let k = 3;
        let result = eliminate_features(&factor, k).unwrap();
        for p in &result.boundary {
            let mut above = 0;
            for &i in &result.retained {
                if p.tuple.contains(&i) {
                    continue;
                }
                let v = factor.matrix().row(i).transpose().dot(&p.direction).abs();
                if v > p.amplitude {
                    above += 1;
                }
            }
            assert_eq!(above, k - 1);
        }
    }

    #[test]
    fn no_elimination_when_k_plus_d_covers_n() {
        let factor = random_factor(6, 2, 1);
        let result = eliminate_features(&factor, 5).unwrap();
        assert_eq!(result.retained, (0..6).collect::<Vec<_>>());
    }

    #[test]
    fn rank1_special_case() {
        let v = DMatrix::from_column_slice(5, 1, &[0.9, -0.5, 0.1, 2.0, -0.2]);
        let factor = LowRankFactor::new(v.clone(), false).unwrap();
        let result = eliminate_features(&factor, 2).unwrap();
        assert_eq!(result.retained, vec![0, 3]);
        // nonnegative flag keeps both signed extremes
        let factor = LowRankFactor::new(v, true).unwrap();
        let result = eliminate_features(&factor, 2).unwrap();
        assert_eq!(result.retained, vec![0, 1, 3, 4]);
    }
}
