mod common;

use clsbm::spectral::{jacobi_eigen, kmeans, kmeans_exhaustive, same_partition, JACOBI_MAX_N};
use clsbm::{
    best_rank_k, build_S, detect, detect_full, misclassified_count, project, sample_clsbm, sample_weights, top_k_eigen,
    AttributeMatrix, DetectOptions,
};
use common::{random_params, random_symmetric, rng, strong_signal, two_block};
use nalgebra::{DMatrix, SymmetricEigen};
use rand::Rng;

fn oracle_top_k(s: &DMatrix<f64>, k: usize) -> Vec<f64> {
    let mut v: Vec<f64> = SymmetricEigen::new(s.clone()).eigenvalues.iter().copied().collect();
    v.sort_by(|a, b| b.abs().total_cmp(&a.abs()));
    v.truncate(k);
    v
}

fn check_basis(s: &DMatrix<f64>, k: usize) {
    let basis = top_k_eigen(s, k).unwrap();
    let opnorm = oracle_top_k(s, 1)[0].abs();
    assert!(basis.max_residual(s) <= 1e-8 * opnorm);
    let gram = basis.vectors.tr_mul(&basis.vectors);
    assert!((gram - DMatrix::identity(k, k)).amax() <= 1e-10);
    for (got, want) in basis.values.iter().zip(oracle_top_k(s, k)) {
        assert!((got.abs() - want.abs()).abs() <= 1e-9 * opnorm.max(1.0), "{got} vs {want}");
    }
}

#[test]
fn eigenpairs_match_full_spectrum_oracle() {
    let mut r = rng(1);
    for n in [8, 20, JACOBI_MAX_N, JACOBI_MAX_N + 1, 120, 200] {
        let s = random_symmetric(&mut r, n);
        for k in [1, 2, 5] {
            check_basis(&s, k);
        }
    }
}

#[test]
fn jacobi_full_decomposition_reconstructs() {
    let mut r = rng(2);
    let s = random_symmetric(&mut r, 8);
    let (values, vectors) = jacobi_eigen(&s).unwrap();
    let rebuilt = &vectors * DMatrix::from_diagonal(&values.clone().into()) * vectors.transpose();
    assert!((rebuilt - &s).amax() < 1e-13);
    let mut ours = values.clone();
    let mut theirs: Vec<f64> = SymmetricEigen::new(s).eigenvalues.iter().copied().collect();
    ours.sort_by(f64::total_cmp);
    theirs.sort_by(f64::total_cmp);
    for (a, b) in ours.iter().zip(&theirs) {
        assert!((a - b).abs() < 1e-12);
    }
}

#[test]
fn low_rank_and_clustered_spectra() {
    // rank-2 block matrix: every other eigenvalue is exactly zero
    let n = 300;
    let s = DMatrix::from_fn(n, n, |i, j| if (i < n / 2) == (j < n / 2) { 0.5 } else { 0.1 });
    check_basis(&s, 2);
    // repeated top eigenvalue
    let s = DMatrix::from_fn(n, n, |i, j| if i == j { if i < 3 { 5.0 } else { (i as f64) / n as f64 } } else { 0.0 });
    check_basis(&s, 3);
    let zero = top_k_eigen(&DMatrix::zeros(100, 100), 2).unwrap();
    assert_eq!(zero.values, vec![0.0, 0.0]);
}

#[test]
fn sampled_aggregated_matrices_meet_residual_bound() {
    for (seed, n) in [(1u64, 50usize), (2, 150), (3, 400)] {
        let ds = sample_clsbm(&strong_signal(n), seed);
        let s = build_S(&ds.graph, &ds.attrs, &sample_weights(1, seed)).unwrap().s;
        check_basis(&s, 2);
    }
}

#[test]
fn projection_is_an_isometry_on_the_rank_k_part() {
    let mut r = rng(3);
    let s = random_symmetric(&mut r, 6);
    let basis = top_k_eigen(&s, 2).unwrap();
    let q = project(&basis, &s);
    let sk = best_rank_k(&s, 2).unwrap();
    for i in 0..6 {
        for j in 0..6 {
            let dq = (q.column(i) - q.column(j)).norm();
            let ds = (sk.column(i) - sk.column(j)).norm();
            assert!((dq - ds).abs() < 1e-12);
        }
    }
}

#[test]
fn best_rank_k_beats_random_candidates() {
    let mut r = rng(4);
    for _ in 0..5 {
        let s = random_symmetric(&mut r, 7);
        let k = r.random_range(1..4);
        let err = (best_rank_k(&s, k).unwrap() - &s).norm();
        for _ in 0..200 {
            let u = DMatrix::from_fn(7, k, |_, _| r.random_range(-1.0..1.0));
            let v = DMatrix::from_fn(k, 7, |_, _| r.random_range(-1.0..1.0));
            assert!(err <= (&u * &v - &s).norm() + 1e-12);
            // symmetric candidates of the same rank
            let sym = &u * u.transpose() * r.random_range(-2.0..2.0);
            assert!(err <= (sym - &s).norm() + 1e-12);
        }
    }
}

#[test]
fn kmeans_separates_distant_clouds() {
    let mut r = rng(5);
    let n = 40;
    let pts = DMatrix::from_fn(2, n, |row, i| {
        let centre = if i < n / 2 { 0.0 } else { 10.0 };
        centre * (row == 0) as u8 as f64 + r.random_range(-0.07..0.07)
    });
    let km = kmeans(&pts, 2, 5, 9);
    let truth: Vec<usize> = (0..n).map(|i| (i >= n / 2) as usize).collect();
    assert!(same_partition(km.labels.labels(), &truth));
    assert!(km.objective < n as f64 * 0.01 * 2.0);
}

#[test]
fn kmeans_with_one_point_per_cluster() {
    let pts = DMatrix::from_column_slice(2, 3, &[0.0, 0.0, 1.0, 5.0, -3.0, 2.0]);
    let km = kmeans(&pts, 3, 4, 1);
    assert_eq!(km.objective, 0.0);
    let mut labels = km.labels.0.clone();
    labels.sort();
    assert_eq!(labels, vec![0, 1, 2]);
}

#[test]
fn kmeans_reaches_exhaustive_optimum_on_planted_instances() {
    let mut r = rng(6);
    for trial in 0..10 {
        let (n, k) = if trial % 2 == 0 { (9, 3) } else { (6, 2) };
        let pts = DMatrix::from_fn(2, n, |row, i| 4.0 * ((i % k) as f64) * (row == 0) as u8 as f64 + r.random_range(-1.0..1.0));
        let best = kmeans_exhaustive(&pts, k).unwrap();
        let km = kmeans(&pts, k, 10, trial);
        assert!((km.objective - best.objective).abs() <= 1e-9 * best.objective.max(1.0));
    }
}

#[test]
fn exhaustive_edge_cases() {
    let dup = DMatrix::from_column_slice(1, 4, &[2.0, 2.0, 7.0, 7.0]);
    assert_eq!(kmeans_exhaustive(&dup, 2).unwrap().objective, 0.0);
    let single = DMatrix::from_column_slice(3, 1, &[1.0, 2.0, 3.0]);
    assert_eq!(kmeans_exhaustive(&single, 1).unwrap().objective, 0.0);
    assert!(kmeans_exhaustive(&DMatrix::zeros(1, 30), 2).is_err());
}

#[test]
fn exhaustive_kmeans_agrees_on_projection_and_rank_k_matrix() {
    let mut r = rng(7);
    for trial in 0..20u64 {
        let n = r.random_range(4..=10);
        let p = random_params(&mut r, n, 2, 1, 2, 0.8, 2.0);
        let ds = sample_clsbm(&p, trial);
        let s = build_S(&ds.graph, &ds.attrs, &sample_weights(1, trial)).unwrap().s;
        let basis = top_k_eigen(&s, 2).unwrap();
        let from_q = kmeans_exhaustive(&project(&basis, &s), 2).unwrap();
        let from_sk = kmeans_exhaustive(&best_rank_k(&s, 2).unwrap(), 2).unwrap();
        assert!(same_partition(from_q.labels.labels(), from_sk.labels.labels()));
    }
}

#[test]
fn strong_signal_detection_is_accurate() {
    let params = strong_signal(1000);
    let good = (0..100u64)
        .filter(|&seed| {
            let ds = sample_clsbm(&params, seed);
            let est = detect(&ds.graph, &ds.attrs, 2, &DetectOptions::with_seed(seed)).unwrap();
            misclassified_count(&ds.sigma, &est, 2).unwrap().rate <= 0.02
        })
        .count();
    assert!(good >= 95, "{good} of 100");
}

#[test]
fn single_community_and_zero_signal() {
    let ds = sample_clsbm(&strong_signal(50), 3);
    let one = detect(&ds.graph, &ds.attrs, 1, &DetectOptions::with_seed(3)).unwrap();
    assert!(one.labels().iter().all(|&c| c == 0));
    let flat = two_block(80, 0.2, 0.2, 0.0);
    let ds = sample_clsbm(&flat, 4);
    let est = detect(&ds.graph, &ds.attrs, 2, &DetectOptions::with_seed(4)).unwrap();
    assert_eq!(est.len(), 80);
    assert!(est.labels().iter().all(|&c| c < 2));
}

#[test]
fn detection_is_deterministic_and_equivariant() {
    let ds = sample_clsbm(&strong_signal(300), 21);
    let opts = DetectOptions::with_seed(5);
    let a = detect_full(&ds.graph, &ds.attrs, 2, &opts).unwrap();
    let b = detect_full(&ds.graph, &ds.attrs, 2, &opts).unwrap();
    assert_eq!(a.assignment, b.assignment);
    assert_eq!(a.aggregated, b.aggregated);
    assert!(a.kmeans.labels.labels().iter().all(|&c| c < 2));

    let mut r = rng(8);
    let order = common::random_perm(&mut r, 300);
    let g = ds.graph.permuted(&order);
    let x = AttributeMatrix(DMatrix::from_fn(2, 300, |row, i| ds.attrs.0[(row, order[i])]));
    let est = detect(&g, &x, 2, &opts).unwrap();
    let pulled_back: Vec<usize> = {
        let mut v = vec![0; 300];
        for (i, &o) in order.iter().enumerate() {
            v[o] = est.labels()[i];
        }
        v
    };
    assert!(same_partition(&pulled_back, a.assignment.labels()));
}

#[test]
fn fixed_weights_override_the_draw() {
    let ds = sample_clsbm(&strong_signal(60), 2);
    let mut opts = DetectOptions::with_seed(1);
    opts.weights = Some(clsbm::LabelWeights::new(vec![0.8]).unwrap());
    let d = detect_full(&ds.graph, &ds.attrs, 2, &opts).unwrap();
    assert_eq!(d.aggregated.weights.as_slice(), &[0.8]);
    opts.seed = 99;
    assert_eq!(detect_full(&ds.graph, &ds.attrs, 2, &opts).unwrap().aggregated.s, d.aggregated.s);
}
