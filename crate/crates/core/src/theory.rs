//! Numerical checks of optimal ensemble weighting for scalar estimators.
//!
//! For a convex combination `f = Σ_k w_k s_k` of estimators of `y`, the
//! mean squared error splits into `Bias(f, y)² + Var(f) + Var(ε)`. With
//! independent estimator errors the variance term is `Σ w_k² Var(s_k)`,
//! minimized by inverse-variance weights. The bias term can only be zeroed
//! by a convex combination when the estimator biases have opposite signs.
//! A brute-force simplex grid search serves as the oracle for both claims.

use rand::Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum TheoryError {
    #[error("need at least 2 samples, got {0}")]
    TooFewSamples(usize),
    #[error("need at least one estimator")]
    NoEstimators,
    #[error("estimator {index} has {found} predictions, expected {expected}")]
    Ragged {
        index: usize,
        expected: usize,
        found: usize,
    },
    #[error("{found} weights for {expected} estimators")]
    WeightCount { expected: usize, found: usize },
    #[error("weights sum to {0}, expected 1")]
    WeightSum(f64),
    #[error("variance {index} must be positive and finite, got {value}")]
    NonPositiveVariance { index: usize, value: f64 },
    #[error("equal biases ({0}) leave the bias-cancelling weights undefined")]
    DegenerateBias(f64),
    #[error("grid step must lie in (0, 0.1], got {0}")]
    GridStep(f64),
}

/// Predictions of several estimators on the same targets.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EnsembleSample {
    /// `predictions[k][i]` is estimator `k` on sample `i`.
    pub predictions: Vec<Vec<f64>>,
    pub targets: Vec<f64>,
    /// Irreducible noise variance, when the generator knows it.
    pub noise_variance: Option<f64>,
}

impl EnsembleSample {
    pub fn new(predictions: Vec<Vec<f64>>, targets: Vec<f64>, noise_variance: Option<f64>) -> Result<Self, TheoryError> {
        let s = Self {
            predictions,
            targets,
            noise_variance,
        };
        s.validate()?;
        Ok(s)
    }

    pub fn validate(&self) -> Result<(), TheoryError> {
        let n = self.targets.len();
        if n < 2 {
            return Err(TheoryError::TooFewSamples(n));
        }
        if self.predictions.is_empty() {
            return Err(TheoryError::NoEstimators);
        }
        for (index, p) in self.predictions.iter().enumerate() {
            if p.len() != n {
                return Err(TheoryError::Ragged {
                    index,
                    expected: n,
                    found: p.len(),
                });
            }
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.targets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.targets.is_empty()
    }

    pub fn num_estimators(&self) -> usize {
        self.predictions.len()
    }

    /// `Σ_k w_k s_k,i` for every sample.
    pub fn combine(&self, weights: &[f64]) -> Vec<f64> {
        (0..self.len())
            .map(|i| weights.iter().zip(&self.predictions).map(|(w, p)| w * p[i]).sum())
            .collect()
    }

    /// Empirical mean squared error of the weighted combination.
    pub fn mse(&self, weights: &[f64]) -> f64 {
        let n = self.len();
        let mut total = 0.0;
        for i in 0..n {
            let f: f64 = weights.iter().zip(&self.predictions).map(|(w, p)| w * p[i]).sum();
            let e = f - self.targets[i];
            total += e * e;
        }
        total / n as f64
    }
}

fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

/// `E[x²] − E[x]²`.
fn moment_variance(xs: &[f64]) -> f64 {
    let m = mean(xs);
    let m2 = xs.iter().map(|x| x * x).sum::<f64>() / xs.len() as f64;
    (m2 - m * m).max(0.0)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct EstimatorStats {
    /// `E[s − y]`.
    pub bias: f64,
    /// `E[s²] − E[s]²`.
    pub variance: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BiasVarianceReport {
    pub weights: Vec<f64>,
    pub per_estimator: Vec<EstimatorStats>,
    /// `E[f − y]`.
    pub bias: f64,
    pub bias_squared: f64,
    /// `E[f²] − E[f]²`.
    pub variance: f64,
    /// `Σ w_k² Var(s_k)`, the combined variance under independence.
    pub independent_variance: f64,
    /// Empirical `E[(f − y)²]`.
    pub mse: f64,
    /// Standard error of `mse` as a sample mean.
    pub mse_standard_error: f64,
    pub noise_variance: Option<f64>,
}

impl BiasVarianceReport {
    /// `Bias² + Var(f) + Var(ε)`, when `Var(ε)` is known.
    pub fn decomposition(&self) -> Option<f64> {
        self.noise_variance.map(|v| self.bias_squared + self.variance + v)
    }
}

fn check_weights(sample: &EnsembleSample, weights: &[f64]) -> Result<(), TheoryError> {
    if weights.len() != sample.num_estimators() {
        return Err(TheoryError::WeightCount {
            expected: sample.num_estimators(),
            found: weights.len(),
        });
    }
    let total: f64 = weights.iter().sum();
    if (total - 1.0).abs() > 1e-9 {
        return Err(TheoryError::WeightSum(total));
    }
    Ok(())
}

pub fn bias_variance_decompose(sample: &EnsembleSample, weights: &[f64]) -> Result<BiasVarianceReport, TheoryError> {
    sample.validate()?;
    check_weights(sample, weights)?;
    let n = sample.len() as f64;
    let per_estimator: Vec<EstimatorStats> = sample
        .predictions
        .iter()
        .map(|p| EstimatorStats {
            bias: p.iter().zip(&sample.targets).map(|(s, y)| s - y).sum::<f64>() / n,
            variance: moment_variance(p),
        })
        .collect();
    let f = sample.combine(weights);
    let bias = f.iter().zip(&sample.targets).map(|(f, y)| f - y).sum::<f64>() / n;
    let losses: Vec<f64> = f.iter().zip(&sample.targets).map(|(f, y)| (f - y).powi(2)).collect();
    let mse = mean(&losses);
    let loss_var = losses.iter().map(|l| (l - mse).powi(2)).sum::<f64>() / (n - 1.0);
    Ok(BiasVarianceReport {
        weights: weights.to_vec(),
        independent_variance: weights
            .iter()
            .zip(&per_estimator)
            .map(|(w, s)| w * w * s.variance)
            .sum(),
        per_estimator,
        bias,
        bias_squared: bias * bias,
        variance: moment_variance(&f),
        mse,
        mse_standard_error: (loss_var / n).sqrt(),
        noise_variance: sample.noise_variance,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WeightSolution {
    pub weights: Vec<f64>,
    /// All weights in `(0, 1)` and summing to 1.
    pub feasible: bool,
    /// The quantity the solution targets: combined variance for
    /// [`optimal_variance_weights`], combined bias for
    /// [`bias_weight_solution`].
    pub objective: f64,
}

fn is_feasible(weights: &[f64]) -> bool {
    weights.iter().all(|&w| w > 0.0 && w < 1.0) && (weights.iter().sum::<f64>() - 1.0).abs() < 1e-12
}

/// Inverse-variance weights `w_k ∝ 1 / Var_k`, normalized to sum 1.
pub fn optimal_variance_weights(variances: &[f64]) -> Result<WeightSolution, TheoryError> {
    if variances.is_empty() {
        return Err(TheoryError::NoEstimators);
    }
    if let Some(index) = variances.iter().position(|&v| !(v > 0.0 && v.is_finite())) {
        return Err(TheoryError::NonPositiveVariance {
            index,
            value: variances[index],
        });
    }
    let precision: f64 = variances.iter().map(|v| 1.0 / v).sum();
    let weights: Vec<f64> = variances.iter().map(|v| (1.0 / v) / precision).collect();
    let objective = weights.iter().zip(variances).map(|(w, v)| w * w * v).sum();
    Ok(WeightSolution {
        feasible: variances.len() == 1 || is_feasible(&weights),
        weights,
        objective,
    })
}

/// Two-estimator weights that cancel the combined bias:
/// `w₀ = b₁ / (b₁ − b₀)`, `w₁ = −b₀ / (b₁ − b₀)`.
///
/// Feasible exactly when the biases have strictly opposite signs.
pub fn bias_weight_solution(bias0: f64, bias1: f64) -> Result<WeightSolution, TheoryError> {
    let denom = bias1 - bias0;
    if denom == 0.0 {
        return Err(TheoryError::DegenerateBias(bias0));
    }
    let weights = vec![bias1 / denom, -bias0 / denom];
    let objective = weights[0] * bias0 + weights[1] * bias1;
    Ok(WeightSolution {
        feasible: is_feasible(&weights),
        weights,
        objective,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GridSearchResult {
    pub weights: Vec<f64>,
    pub mse: f64,
    /// Number of grid points evaluated.
    pub evaluated: usize,
    /// Effective spacing `1 / round(1 / grid_step)`.
    pub step: f64,
}

fn compositions(total: usize, parts: usize) -> Vec<Vec<usize>> {
    fn rec(remaining: usize, parts: usize, prefix: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if parts == 1 {
            prefix.push(remaining);
            out.push(prefix.clone());
            prefix.pop();
            return;
        }
        for i in 0..=remaining {
            prefix.push(i);
            rec(remaining - i, parts - 1, prefix, out);
            prefix.pop();
        }
    }
    let mut out = Vec::new();
    rec(total, parts, &mut Vec::with_capacity(parts), &mut out);
    out
}

/// Exhaustive search over the weight simplex for the minimum empirical MSE.
///
/// Grid points are `w = c / n` for every composition `c` of
/// `n = round(1 / grid_step)` into `K` parts. Evaluation runs in parallel;
/// ties resolve to the first point in enumeration order.
pub fn grid_search_weight_oracle(sample: &EnsembleSample, grid_step: f64) -> Result<GridSearchResult, TheoryError> {
    sample.validate()?;
    if !(grid_step > 0.0 && grid_step <= 0.1) {
        return Err(TheoryError::GridStep(grid_step));
    }
    let n = (1.0 / grid_step).round() as usize;
    let grid = compositions(n, sample.num_estimators());
    let scores: Vec<f64> = grid
        .par_iter()
        .map(|c| {
            let w: Vec<f64> = c.iter().map(|&i| i as f64 / n as f64).collect();
            sample.mse(&w)
        })
        .collect();
    let best = scores
        .iter()
        .enumerate()
        .fold(0, |best, (i, &s)| if s < scores[best] { i } else { best });
    Ok(GridSearchResult {
        weights: grid[best].iter().map(|&i| i as f64 / n as f64).collect(),
        mse: scores[best],
        evaluated: grid.len(),
        step: 1.0 / n as f64,
    })
}

/// Unconstrained minimizer of the empirical MSE along `w₀ + w₁ = 1`,
/// clamped to `[0, 1]`.
fn empirical_optimal_w0(s0: &[f64], s1: &[f64], y: &[f64]) -> f64 {
    let (mut num, mut den) = (0.0, 0.0);
    for i in 0..y.len() {
        let e0 = s0[i] - y[i];
        let e1 = s1[i] - y[i];
        let diff = e0 - e1;
        num -= diff * e1;
        den += diff * diff;
    }
    if den == 0.0 {
        0.5
    } else {
        (num / den).clamp(0.0, 1.0)
    }
}

/// Batch-means standard error of the sample-optimal `w₀` for a
/// two-estimator ensemble: the sample is cut into `batches` contiguous
/// blocks, `w₀` is solved on each, and the spread of those solutions is
/// scaled by `1/√batches`.
pub fn optimal_weight_standard_error(sample: &EnsembleSample, batches: usize) -> Result<f64, TheoryError> {
    sample.validate()?;
    if sample.num_estimators() != 2 {
        return Err(TheoryError::WeightCount {
            expected: 2,
            found: sample.num_estimators(),
        });
    }
    let batches = batches.clamp(2, sample.len());
    let size = sample.len() / batches;
    let estimates: Vec<f64> = (0..batches)
        .map(|b| {
            let r = b * size..(b + 1) * size;
            empirical_optimal_w0(
                &sample.predictions[0][r.clone()],
                &sample.predictions[1][r.clone()],
                &sample.targets[r],
            )
        })
        .collect();
    let m = mean(&estimates);
    let var = estimates.iter().map(|e| (e - m).powi(2)).sum::<f64>() / (batches - 1) as f64;
    Ok((var / batches as f64).sqrt())
}

/// Unbiased estimators with independent Gaussian errors:
/// `y ~ N(0, 1)` and `s_k = y + N(0, variances[k])`.
pub fn simulate_unbiased_ensemble<R: Rng + ?Sized>(variances: &[f64], n: usize, rng: &mut R) -> EnsembleSample {
    let mut targets = Vec::with_capacity(n);
    let mut predictions: Vec<Vec<f64>> = variances.iter().map(|_| Vec::with_capacity(n)).collect();
    for _ in 0..n {
        let y: f64 = rng.sample(StandardNormal);
        targets.push(y);
        for (p, v) in predictions.iter_mut().zip(variances) {
            let e: f64 = rng.sample(StandardNormal);
            p.push(y + v.sqrt() * e);
        }
    }
    EnsembleSample {
        predictions,
        targets,
        noise_variance: None,
    }
}

/// Regression ensemble at a fixed input: `y = signal + ε` with
/// `Var(ε) = noise_variance`, and `s_k = signal + biases[k] + N(0, variances[k])`.
pub fn simulate_regression_ensemble<R: Rng + ?Sized>(
    signal: f64,
    biases: &[f64],
    variances: &[f64],
    noise_variance: f64,
    n: usize,
    rng: &mut R,
) -> EnsembleSample {
    let mut targets = Vec::with_capacity(n);
    let mut predictions: Vec<Vec<f64>> = biases.iter().map(|_| Vec::with_capacity(n)).collect();
    for _ in 0..n {
        let eps: f64 = rng.sample(StandardNormal);
        targets.push(signal + noise_variance.sqrt() * eps);
        for ((p, b), v) in predictions.iter_mut().zip(biases).zip(variances) {
            let e: f64 = rng.sample(StandardNormal);
            p.push(signal + b + v.sqrt() * e);
        }
    }
    EnsembleSample {
        predictions,
        targets,
        noise_variance: Some(noise_variance),
    }
}
