use serde::{Deserialize, Serialize};

use super::TrainError;
use crate::tensor::Matrix;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OptimizerConfig {
    pub lr: f64,
    pub momentum: f64,
    pub weight_decay: f64,
    pub epochs: usize,
    pub batch_size: usize,
    /// Seeds model init and batch order.
    pub seed: u64,
}

impl Default for OptimizerConfig {
    fn default() -> Self {
        Self {
            lr: 1e-3,
            momentum: 0.9,
            weight_decay: 1e-4,
            epochs: 30,
            batch_size: 64,
            seed: 0,
        }
    }
}

impl OptimizerConfig {
    pub fn validate(&self) -> Result<(), TrainError> {
        let mut problems = Vec::new();
        if !(self.lr > 0.0 && self.lr.is_finite()) {
            problems.push(format!("lr must be > 0, got {}", self.lr));
        }
        if !(0.0..1.0).contains(&self.momentum) {
            problems.push(format!("momentum must be in [0, 1), got {}", self.momentum));
        }
        if !(self.weight_decay >= 0.0 && self.weight_decay.is_finite()) {
            problems.push(format!("weight_decay must be >= 0, got {}", self.weight_decay));
        }
        if self.batch_size == 0 {
            problems.push("batch_size must be >= 1".into());
        }
        if problems.is_empty() {
            Ok(())
        } else {
            Err(TrainError::InvalidOptimizer(problems))
        }
    }
}

/// Per-parameter momentum buffers, lazily zero-initialized.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct SgdState {
    pub velocity: Vec<Matrix>,
}

/// `v ← μ·v + (g + λ·p)`, then `p ← p − lr·v`.
pub fn sgd_update(
    params: &mut [&mut Matrix],
    grads: &[Matrix],
    state: &mut SgdState,
    opt: &OptimizerConfig,
) -> Result<(), TrainError> {
    if params.len() != grads.len() {
        return Err(TrainError::ShapeMismatch(format!(
            "{} parameters but {} gradients",
            params.len(),
            grads.len()
        )));
    }
    if state.velocity.is_empty() {
        state.velocity = params.iter().map(|p| Matrix::zeros(p.rows(), p.cols())).collect();
    }
    if state.velocity.len() != params.len() {
        return Err(TrainError::ShapeMismatch(format!(
            "{} velocity buffers for {} parameters",
            state.velocity.len(),
            params.len()
        )));
    }
    for (i, ((p, g), v)) in params.iter_mut().zip(grads).zip(&mut state.velocity).enumerate() {
        if p.shape() != g.shape() || p.shape() != v.shape() {
            return Err(TrainError::ShapeMismatch(format!(
                "parameter {i}: {:?}, gradient {:?}, velocity {:?}",
                p.shape(),
                g.shape(),
                v.shape()
            )));
        }
        let pv = p.as_mut_slice();
        for ((pj, &gj), vj) in pv.iter_mut().zip(g.as_slice()).zip(v.as_mut_slice()) {
            *vj = opt.momentum * *vj + (gj + opt.weight_decay * *pj);
            *pj -= opt.lr * *vj;
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn opt(lr: f64, momentum: f64, wd: f64) -> OptimizerConfig {
        OptimizerConfig {
            lr,
            momentum,
            weight_decay: wd,
            ..OptimizerConfig::default()
        }
    }

    fn step(p: f64, g: f64, o: &OptimizerConfig, state: &mut SgdState) -> f64 {
        let mut m = Matrix::scalar(p);
        sgd_update(&mut [&mut m], &[Matrix::scalar(g)], state, o).unwrap();
        m.get(0, 0)
    }

    #[test]
    fn plain_gradient_step() {
        let p = step(1.0, 0.5, &opt(0.1, 0.0, 0.0), &mut SgdState::default());
        assert!((p - 0.95).abs() < 1e-15);
    }

    #[test]
    fn first_momentum_step_equals_plain_step() {
        let a = step(1.0, 0.5, &opt(0.1, 0.9, 0.0), &mut SgdState::default());
        let b = step(1.0, 0.5, &opt(0.1, 0.0, 0.0), &mut SgdState::default());
        assert_eq!(a, b);
    }

    #[test]
    fn weight_decay_shrinks_parameter() {
        let p = step(1.0, 0.0, &opt(0.1, 0.0, 0.1), &mut SgdState::default());
        assert!((p - 0.99).abs() < 1e-15);
    }

    #[test]
    fn momentum_accumulates() {
        let o = opt(0.1, 0.9, 0.0);
        let mut s = SgdState::default();
        let p = step(1.0, 1.0, &o, &mut s);
        let p = step(p, 1.0, &o, &mut s);
        // v₁ = 1, v₂ = 1.9 → p = 1 − 0.1 − 0.19
        assert!((p - 0.71).abs() < 1e-12);
    }

    #[test]
    fn shape_mismatch_is_an_error() {
        let mut m = Matrix::zeros(2, 2);
        let err = sgd_update(&mut [&mut m], &[Matrix::zeros(1, 2)], &mut SgdState::default(), &opt(0.1, 0.0, 0.0));
        assert!(matches!(err, Err(TrainError::ShapeMismatch(_))));
    }

    #[test]
    fn optimizer_validation() {
        assert!(OptimizerConfig::default().validate().is_ok());
        assert!(opt(0.0, 0.9, 0.0).validate().is_err());
        assert!(opt(0.1, 1.0, 0.0).validate().is_err());
        assert!(opt(0.1, 0.5, -1.0).validate().is_err());
    }
}
