//! Inverse-variance weights against a brute-force grid search on simulated
//! estimators, plus the bias-cancelling two-estimator solution.

use arl::theory::{
    bias_variance_decompose, bias_weight_solution, grid_search_weight_oracle, optimal_variance_weights,
    optimal_weight_standard_error, simulate_regression_ensemble, simulate_unbiased_ensemble,
};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut rng = ChaCha8Rng::seed_from_u64(0);
    println!("{:>10} {:>8} {:>8} {:>8}", "variances", "closed", "oracle", "3 SE");
    for v in [(1.0, 4.0), (2.0, 2.0), (0.5, 8.0), (6.0, 1.5)] {
        let sample = simulate_unbiased_ensemble(&[v.0, v.1], 100_000, &mut rng);
        let closed = optimal_variance_weights(&[v.0, v.1])?;
        let oracle = grid_search_weight_oracle(&sample, 0.01)?;
        let se = optimal_weight_standard_error(&sample, 20)?;
        println!(
            "{:>4}:{:<5} {:>8.4} {:>8.4} {:>8.4}",
            v.0,
            v.1,
            closed.weights[0],
            oracle.weights[0],
            3.0 * se
        );
    }

    for (b0, b1) in [(0.5, -0.25), (0.3, 0.6), (0.4, 0.4)] {
        match bias_weight_solution(b0, b1) {
            Ok(s) => println!("biases {b0:+}, {b1:+}: weights {:.3?} feasible {}", s.weights, s.feasible),
            Err(e) => println!("biases {b0:+}, {b1:+}: {e}"),
        }
    }

    let sample = simulate_regression_ensemble(1.0, &[0.5, -0.3], &[1.0, 2.0], 0.5, 100_000, &mut rng);
    let r = bias_variance_decompose(&sample, &[0.5, 0.5])?;
    println!(
        "decomposition: bias^2 {:.4} + variance {:.4} + noise {:.4} vs mse {:.4}",
        r.bias_squared,
        r.variance,
        r.noise_variance.unwrap_or(0.0),
        r.mse
    );
    Ok(())
}
