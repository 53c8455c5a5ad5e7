//! End-to-end library flows across storage kinds and deflation modes.

use nalgebra::{DMatrix, DVector};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use spannogram::experiments::{make_spiked_model, sample_covariance};
use spannogram::io::{read_matrix, MatrixFormat, ReadOptions};
use spannogram::solver::{
    multi_component, sparse_pca, Deflation, MatrixInput, SolveOptions,
};
use spannogram::{top_eigenpairs, DataMatrix, SymmetricMatrixView};

fn random_data(n: usize, m: usize, seed: u64) -> DataMatrix {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let dense: DMatrix<f64> = DMatrix::from_fn(n, m, |_, _| {
        let v: f64 = StandardNormal.sample(&mut rng);
        if v.abs() > 0.5 {
            v
        } else {
            0.0
        }
    });
    DataMatrix::from_dense(&dense)
}

#[test]
fn implicit_and_dense_views_agree_through_the_solver() {
    for seed in 0..4 {
        let data = random_data(18, 9, seed);
        let implicit = SymmetricMatrixView::implicit(data.clone(), 0.5);
        let dense = SymmetricMatrixView::dense(implicit.to_dense()).unwrap();
        let opts = SolveOptions::default();
        let a = sparse_pca(&implicit, 4, 2, &opts).unwrap();
        let b = sparse_pca(&dense, 4, 2, &opts).unwrap();
        assert_eq!(a.support, b.support, "seed {seed}");
        assert!((a.value - b.value).abs() < 1e-9);
        let pa = top_eigenpairs(&implicit, 3).unwrap();
        let pb = top_eigenpairs(&dense, 3).unwrap();
        for j in 0..pa.len().min(pb.len()) {
            assert!((pa.values[j] - pb.values[j]).abs() < 1e-9);
        }
    }
}

#[test]
fn spiked_multi_component_recovers_both_supports() {
    let model = make_spiked_model(120, 3).unwrap();
    let a = sample_covariance(&model, 60, 17);
    let input = MatrixInput::View(a);
    let result =
        multi_component(&input, 10, 2, 2, Deflation::Projection, &SolveOptions::default())
            .unwrap();
    let mut found: Vec<Vec<usize>> =
        result.components.iter().map(|c| c.support.clone()).collect();
    let mut planted = [model.support1.clone(), model.support2.clone()];
    found.sort();
    planted.sort();
    assert_eq!(found, planted);
    assert!(result.explained_variance_ratio > 0.9);
}

#[test]
fn docword_corpus_end_to_end() {
    // tiny corpus: word 0 and word 1 co-occur in most docs, word 2 rare
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("docword.txt");
    let mut text = String::from("6\n4\n11\n");
    for (doc, word) in
        [(1, 1), (1, 2), (2, 1), (2, 2), (3, 1), (3, 2), (4, 1), (4, 2), (5, 1), (5, 3), (6, 4)]
    {
        text.push_str(&format!("{doc} {word} 1\n"));
    }
    std::fs::write(&path, text).unwrap();
    let input = read_matrix(&path, MatrixFormat::Docword, &ReadOptions::default()).unwrap();
    let view = input.view();
    assert!(view.is_entrywise_nonnegative());
    let pc = sparse_pca(&view, 2, 2, &SolveOptions::default()).unwrap();
    assert_eq!(pc.support, vec![0, 1]);
}

#[test]
fn elimination_toggle_is_invisible_on_low_rank_inputs() {
    for (n, seed) in [(60usize, 1u64), (90, 2)] {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let v: DMatrix<f64> = DMatrix::from_fn(n, 2, |_, _| StandardNormal.sample(&mut rng));
        let a = SymmetricMatrixView::dense(&v * v.transpose()).unwrap();
        let on = sparse_pca(&a, 6, 2, &SolveOptions::default()).unwrap();
        let off = sparse_pca(
            &a,
            6,
            2,
            &SolveOptions { elimination: false, ..SolveOptions::default() },
        )
        .unwrap();
        assert_eq!(on.support, off.support);
        assert!((on.value - off.value).abs() < 1e-9);
        assert!(on.retained_features < n, "elimination retained everything");
    }
}

#[test]
fn projection_chain_keeps_views_consistent() {
    let data = random_data(25, 12, 9);
    let implicit = SymmetricMatrixView::implicit(data, 1.0);
    let pairs = top_eigenpairs(&implicit, 3).unwrap();
    let v1 = pairs.vectors.column(0).into_owned();
    let deflated = spannogram::solver::deflate_projection(&implicit, &v1).unwrap();
    let v2 = top_eigenpairs(&deflated, 1).unwrap().vectors.column(0).into_owned();
    let twice = spannogram::solver::deflate_projection(&deflated, &v2).unwrap();
    let dense_twice = SymmetricMatrixView::dense(twice.to_dense()).unwrap();
    let mut x = DVector::zeros(25);
    x[3] = 0.6;
    x[11] = -0.8;
    assert!((twice.matvec(&x) - dense_twice.matvec(&x)).norm() < 1e-10);
    let a = sparse_pca(&twice, 3, 2, &SolveOptions::default()).unwrap();
    let b = sparse_pca(&dense_twice, 3, 2, &SolveOptions::default()).unwrap();
    assert_eq!(a.support, b.support);
    assert!((a.value - b.value).abs() < 1e-9);
}
