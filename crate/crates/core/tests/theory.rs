use approx::assert_relative_eq;
use arl::theory::{
    bias_variance_decompose, bias_weight_solution, grid_search_weight_oracle, optimal_variance_weights,
    simulate_regression_ensemble, simulate_unbiased_ensemble, EnsembleSample, TheoryError,
};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

#[test]
fn inverse_variance_weights_for_one_and_four() {
    let w = optimal_variance_weights(&[1.0, 4.0]).unwrap();
    assert_relative_eq!(w.weights[0], 0.8, epsilon = 1e-15);
    assert_relative_eq!(w.weights[1], 0.2, epsilon = 1e-15);
    assert!(w.feasible);
}

#[test]
fn oracle_finds_the_closed_form_on_a_large_sample() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let sample = simulate_unbiased_ensemble(&[1.0, 4.0], 200_000, &mut rng);
    let oracle = grid_search_weight_oracle(&sample, 0.01).unwrap();
    assert!((oracle.weights[0] - 0.8).abs() <= 0.02, "{oracle:?}");
    assert_eq!(oracle.evaluated, 101);
}

#[test]
fn three_estimator_grid_covers_the_simplex() {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let sample = simulate_unbiased_ensemble(&[1.0, 2.0, 4.0], 20_000, &mut rng);
    let oracle = grid_search_weight_oracle(&sample, 0.05).unwrap();
    // (n + 1)(n + 2) / 2 compositions with n = 20.
    assert_eq!(oracle.evaluated, 231);
    let closed = optimal_variance_weights(&[1.0, 2.0, 4.0]).unwrap();
    for (o, c) in oracle.weights.iter().zip(&closed.weights) {
        assert!((o - c).abs() <= 0.1, "{oracle:?} vs {closed:?}");
    }
}

#[test]
fn degenerate_bias_pair_is_an_error_not_a_panic() {
    assert!(matches!(bias_weight_solution(0.4, 0.4), Err(TheoryError::DegenerateBias(_))));
}

#[test]
fn combined_variance_under_inverse_weights_beats_each_estimator() {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let sample = simulate_unbiased_ensemble(&[2.0, 3.0], 100_000, &mut rng);
    let w = optimal_variance_weights(&[2.0, 3.0]).unwrap();
    let combined = sample.mse(&w.weights);
    assert!(combined < sample.mse(&[1.0, 0.0]));
    assert!(combined < sample.mse(&[0.0, 1.0]));
    // 1 / (1/2 + 1/3) = 1.2
    assert!((combined - 1.2).abs() < 0.03, "{combined}");
}

#[test]
fn decomposition_recovers_known_components() {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let sample = simulate_regression_ensemble(1.0, &[0.5, -0.3], &[1.0, 2.0], 0.5, 200_000, &mut rng);
    let r = bias_variance_decompose(&sample, &[0.5, 0.5]).unwrap();
    assert!((r.bias - 0.1).abs() < 0.01, "{r:?}");
    assert!((r.variance - 0.75).abs() < 0.02, "{r:?}");
    assert!((r.mse - r.decomposition().unwrap()).abs() < 3.0 * r.mse_standard_error);
}

#[test]
fn invalid_samples_and_weights_are_rejected() {
    assert!(EnsembleSample::new(vec![vec![1.0]], vec![1.0], None).is_err());
    assert!(EnsembleSample::new(vec![vec![1.0, 2.0], vec![1.0]], vec![0.0, 0.0], None).is_err());
    let s = EnsembleSample::new(vec![vec![1.0, 2.0], vec![0.0, 1.0]], vec![0.0, 0.0], None).unwrap();
    assert!(bias_variance_decompose(&s, &[0.7, 0.7]).is_err());
    assert!(bias_variance_decompose(&s, &[1.0]).is_err());
    assert!(grid_search_weight_oracle(&s, 0.0).is_err());
    assert!(grid_search_weight_oracle(&s, 0.5).is_err());
    assert!(optimal_variance_weights(&[1.0, 0.0]).is_err());
}

proptest! {
    #[test]
    fn feasible_exactly_when_biases_have_opposite_signs(b0 in -10.0f64..10.0, b1 in -10.0f64..10.0) {
        prop_assume!(b0 != b1);
        let sol = bias_weight_solution(b0, b1).unwrap();
        prop_assert_eq!(sol.feasible, b0 * b1 < 0.0);
        prop_assert!((sol.weights[0] + sol.weights[1] - 1.0).abs() < 1e-12);
        if sol.feasible {
            prop_assert!((sol.weights[0] * b0 + sol.weights[1] * b1).abs() < 1e-12);
        }
    }

    #[test]
    fn inverse_variance_weights_are_proportional_to_precision(
        v in prop::collection::vec(0.01f64..100.0, 2..6),
    ) {
        let w = optimal_variance_weights(&v).unwrap().weights;
        prop_assert!((w.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        for i in 1..v.len() {
            prop_assert!((w[0] * v[0] - w[i] * v[i]).abs() < 1e-9 * w[0] * v[0]);
        }
    }
}
