mod support;

use cclab::ahp::{
    build_comparison_matrix, calculate_consistency, calculate_priority_weights, perform_sensitivity_analysis,
    random_index, rank_criteria, run_dsa, AhpError, ComparisonMatrix, DsaOptions, Judgment,
};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use support::{dense_principal_eigen, ids};

fn random_reciprocal(rng: &mut ChaCha8Rng, n: usize) -> ComparisonMatrix {
    let mut judgments = Vec::new();
    for i in 0..n {
        for j in (i + 1)..n {
            // Log-uniform over [1/9, 9].
            let v = (rng.random_range(-1.0..1.0f64) * 9f64.ln()).exp();
            judgments.push(Judgment::new(i, j, v));
        }
    }
    build_comparison_matrix(&ids(n), &judgments).unwrap()
}

#[test]
fn weights_match_dense_eigendecomposition() {
    let mut rng = ChaCha8Rng::seed_from_u64(42);
    for case in 0..150 {
        let n = 2 + case % 3;
        let m = random_reciprocal(&mut rng, n);
        let w = calculate_priority_weights(&m).unwrap();
        let (lambda, oracle) = dense_principal_eigen(&m.rows());
        for (a, b) in w.iter().zip(&oracle) {
            assert!((a - b).abs() < 1e-8, "case {case}: {w:?} vs {oracle:?}");
        }
        let d = calculate_consistency(&m, &w).unwrap();
        assert!((d.lambda_max - lambda).abs() < 1e-8, "case {case}: {} vs {lambda}", d.lambda_max);
    }
}

#[test]
fn consistent_matrices_have_zero_inconsistency() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for case in 0..100 {
        let n = 3 + case % 4;
        let truth: Vec<f64> = (0..n).map(|_| rng.random_range(0.05..10.0)).collect();
        let m = ComparisonMatrix::from_weights(&ids(n), &truth).unwrap();
        let w = calculate_priority_weights(&m).unwrap();
        let d = calculate_consistency(&m, &w).unwrap();
        assert!(d.ci.abs() <= 1e-8, "case {case}: CI {}", d.ci);
        assert_eq!(d.cr, 0.0);
        let (_, oracle) = dense_principal_eigen(&m.rows());
        let total: f64 = truth.iter().sum();
        for i in 0..n {
            assert!((w[i] - oracle[i]).abs() < 1e-8);
            assert!((w[i] - truth[i] / total).abs() < 1e-8);
        }
    }
}

#[test]
fn inconsistent_three_by_three() {
    let rows = vec![vec![1.0, 2.0, 0.5], vec![0.5, 1.0, 4.0], vec![2.0, 0.25, 1.0]];
    let m = ComparisonMatrix::from_rows(&ids(3), &rows).unwrap();
    let w = calculate_priority_weights(&m).unwrap();
    // Frozen from an independent dense eigensolver.
    let expected = [0.3274800020733262, 0.4125989480318005, 0.25992104989487325];
    for (a, b) in w.iter().zip(expected) {
        assert!((a - b).abs() < 1e-9);
    }
    let d = calculate_consistency(&m, &w).unwrap();
    assert!((d.lambda_max - 3.916692362781796).abs() < 1e-9);
    assert!((d.ci - 0.458346181390898).abs() < 1e-9);
    assert!((d.cr - 0.458346181390898 / random_index(3).unwrap()).abs() < 1e-9);
    assert_eq!(d.aci, d.ci);
    assert!(!d.consistent);

    let judgments = [Judgment::new(0, 1, 2.0), Judgment::new(0, 2, 0.5), Judgment::new(1, 2, 4.0)];
    let err = run_dsa(&ids(3), &judgments, &DsaOptions::default()).unwrap_err();
    assert!(matches!(err, AhpError::InconsistentJudgments(_)));
    assert!(err.to_string().starts_with("Inconsistent pairwise comparisons"));
}

#[test]
fn sensitivity_replays_against_independent_draws() {
    let m = ComparisonMatrix::from_rows(&ids(3), &vec![vec![1.0; 3]; 3]).unwrap();
    let w = calculate_priority_weights(&m).unwrap();
    let (perturbation, trials, seed) = (0.1, 64, 11);
    let stability = perform_sensitivity_analysis(&m, &w, perturbation, trials, seed).unwrap();

    // Same draw order: trial by trial, pairs (0,1), (0,2), (1,2).
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut kept = [0usize; 3];
    for _ in 0..trials {
        let mut rows = vec![vec![1.0; 3]; 3];
        for (i, j) in [(0, 1), (0, 2), (1, 2)] {
            let u: f64 = rng.random();
            let v = 1.0 + perturbation * (2.0 * u - 1.0);
            rows[i][j] = v;
            rows[j][i] = 1.0 / v;
        }
        let (_, weights) = dense_principal_eigen(&rows);
        let mut order = [0usize, 1, 2];
        order.sort_by(|&a, &b| weights[b].total_cmp(&weights[a]));
        for (position, &index) in order.iter().enumerate() {
            // Equal weights rank in list order, so the baseline rank of i is i + 1.
            if position == index {
                kept[index] += 1;
            }
        }
    }
    let expected: Vec<f64> = kept.iter().map(|&k| k as f64 / trials as f64).collect();
    assert_eq!(stability, expected);
    assert!(stability.iter().any(|&s| s < 1.0), "noise never moved a rank: {stability:?}");
}

#[test]
fn zero_perturbation_keeps_every_rank() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let m = random_reciprocal(&mut rng, 4);
    let w = calculate_priority_weights(&m).unwrap();
    assert_eq!(perform_sensitivity_analysis(&m, &w, 0.0, 20, 5).unwrap(), vec![1.0; 4]);
}

fn judgment_sets() -> impl Strategy<Value = (usize, Vec<f64>)> {
    (2usize..=6).prop_flat_map(|n| (Just(n), prop::collection::vec(-2.2f64..2.2, n * (n - 1) / 2)))
}

fn matrix_from(n: usize, logs: &[f64]) -> ComparisonMatrix {
    let mut judgments = Vec::new();
    let mut k = 0;
    for i in 0..n {
        for j in (i + 1)..n {
            judgments.push(Judgment::new(i, j, logs[k].exp()));
            k += 1;
        }
    }
    build_comparison_matrix(&ids(n), &judgments).unwrap()
}

proptest! {
    #[test]
    fn built_matrices_are_reciprocal((n, logs) in judgment_sets()) {
        let m = matrix_from(n, &logs);
        for i in 0..n {
            prop_assert_eq!(m.get(i, i), 1.0);
            for j in 0..n {
                prop_assert!((m.get(i, j) * m.get(j, i) - 1.0).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn weights_are_normalised((n, logs) in judgment_sets()) {
        let w = calculate_priority_weights(&matrix_from(n, &logs)).unwrap();
        prop_assert!((w.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        prop_assert!(w.iter().all(|&x| x > 0.0));
        let mut ranks = rank_criteria(&w);
        ranks.sort_unstable();
        prop_assert_eq!(ranks, (1..=n).collect::<Vec<_>>());
    }

    #[test]
    fn lambda_max_is_at_least_the_order((n, logs) in judgment_sets()) {
        let m = matrix_from(n, &logs);
        let w = calculate_priority_weights(&m).unwrap();
        let d = calculate_consistency(&m, &w).unwrap();
        prop_assert!(d.lambda_max >= n as f64 - 1e-9);
        prop_assert!(d.ci >= 0.0);
    }

    #[test]
    fn consistent_matrices_score_zero(truth in prop::collection::vec(0.01f64..100.0, 3..=8)) {
        let m = ComparisonMatrix::from_weights(&ids(truth.len()), &truth).unwrap();
        let w = calculate_priority_weights(&m).unwrap();
        let d = calculate_consistency(&m, &w).unwrap();
        prop_assert_eq!(d.ci, 0.0);
        prop_assert_eq!(d.cr, 0.0);
        prop_assert!(d.consistent);
    }

    #[test]
    fn scaling_the_generating_weights_changes_nothing(
        truth in prop::collection::vec(0.01f64..100.0, 2..=8),
        scale in 0.001f64..1000.0,
    ) {
        let n = truth.len();
        let scaled: Vec<f64> = truth.iter().map(|w| w * scale).collect();
        let a = calculate_priority_weights(&ComparisonMatrix::from_weights(&ids(n), &truth).unwrap()).unwrap();
        let b = calculate_priority_weights(&ComparisonMatrix::from_weights(&ids(n), &scaled).unwrap()).unwrap();
        for (x, y) in a.iter().zip(&b) {
            prop_assert!((x - y).abs() < 1e-12);
        }
    }

    #[test]
    fn relabelling_permutes_weights((n, logs) in judgment_sets(), rotate in 0usize..6) {
        let m = matrix_from(n, &logs);
        let r = rotate % n;
        let perm: Vec<usize> = (0..n).map(|i| (i + r) % n).collect();
        let rows: Vec<Vec<f64>> = (0..n).map(|i| (0..n).map(|j| m.get(perm[i], perm[j])).collect()).collect();
        let permuted = ComparisonMatrix::from_rows(&ids(n), &rows).unwrap();
        let w = calculate_priority_weights(&m).unwrap();
        let wp = calculate_priority_weights(&permuted).unwrap();
        for i in 0..n {
            prop_assert!((wp[i] - w[perm[i]]).abs() < 1e-9);
        }
    }
}
