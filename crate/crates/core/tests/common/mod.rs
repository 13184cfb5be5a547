#![allow(dead_code)]

use arl::arl::{ArlConfig, ArlObjective, Target};
use arl::data::{generate_synthetic, Dataset, SynthSpec};
use arl::model::{forward_with_leaves, FusionKind, ModelConfig, ModelParams, ParamLeaves};
use arl::tensor::{finite_difference_check, FdReport, Graph, Matrix};
use arl::train::{OptimizerConfig, TrainError};

/// Modality 0 clean, modality 1 noisy; four classes, 200 samples each.
pub fn imbalanced_spec(seed: u64) -> SynthSpec {
    SynthSpec {
        num_classes: 4,
        samples_per_class: 200,
        feature_dims: vec![16, 16],
        noise: vec![0.3, 2.0],
        separation: 1.0,
        seed,
    }
}

pub fn imbalanced_model() -> ModelConfig {
    ModelConfig {
        input_dims: vec![16, 16],
        hidden: vec![32],
        rep_dims: vec![16, 16],
        fusion: FusionKind::Concat,
        num_classes: 4,
    }
}

pub fn imbalanced_data(seed: u64) -> (Dataset, Dataset) {
    generate_synthetic(&imbalanced_spec(seed)).expect("valid spec")
}

pub fn optimizer(seed: u64, epochs: usize) -> OptimizerConfig {
    OptimizerConfig {
        seed,
        epochs,
        ..OptimizerConfig::default()
    }
}

/// Small dataset for quick training tests.
pub fn tiny_data(seed: u64, noise: Vec<f64>) -> (Dataset, Dataset) {
    let dims = vec![4; noise.len()];
    generate_synthetic(&SynthSpec {
        num_classes: 3,
        samples_per_class: 40,
        feature_dims: dims,
        noise,
        separation: 2.0,
        seed,
    })
    .unwrap()
}

pub fn tiny_model(k: usize, fusion: FusionKind) -> ModelConfig {
    ModelConfig {
        input_dims: vec![4; k],
        hidden: vec![8],
        rep_dims: vec![6; k],
        fusion,
        num_classes: 3,
    }
}

/// Finite-difference check of the full ARL objective (multimodal forward,
/// fused and unimodal cross-entropies) with respect to every parameter.
pub fn check_arl_gradient(params: &ModelParams, features: &[Matrix], labels: &[usize], cfg: &ArlConfig) -> FdReport {
    let mc = params.config.clone();
    let flat: Vec<Matrix> = params.tensors().into_iter().cloned().collect();
    finite_difference_check::<_, TrainError>(
        |g, leaves| {
            let pass = forward_with_leaves(g, &mc, ParamLeaves::from_flat(&mc, leaves), features)?;
            let mut obj = ArlObjective::new(cfg.clone(), Target::Variance)?;
            let (loss, _) = obj.loss(g, pass.fused_logits, &pass.unimodal_logits, labels)?;
            Ok(loss)
        },
        &flat,
        1e-5,
    )
    .expect("gradient check runs")
}

/// Analytic gradient of one parameter entry and its central difference at
/// each `eps`.
pub fn probe_entry(
    params: &ModelParams,
    features: &[Matrix],
    labels: &[usize],
    cfg: &ArlConfig,
    entry: (usize, usize),
    eps: &[f64],
) -> (f64, Vec<f64>) {
    let mc = params.config.clone();
    let flat: Vec<Matrix> = params.tensors().into_iter().cloned().collect();
    let eval = |w: &[Matrix], backward: bool| {
        let mut g = Graph::new();
        let leaves: Vec<_> = w.iter().map(|m| g.leaf(m.clone())).collect();
        let pass = forward_with_leaves(&mut g, &mc, ParamLeaves::from_flat(&mc, &leaves), features).unwrap();
        let mut obj = ArlObjective::new(cfg.clone(), Target::Variance).unwrap();
        let (loss, _) = obj.loss(&mut g, pass.fused_logits, &pass.unimodal_logits, labels).unwrap();
        if backward {
            g.backward(loss).unwrap();
            g.grad(leaves[entry.0]).as_slice()[entry.1]
        } else {
            g.value(loss).get(0, 0)
        }
    };
    let shifted = |d: f64| {
        let mut w = flat.clone();
        w[entry.0].as_mut_slice()[entry.1] += d;
        eval(&w, false)
    };
    let analytic = eval(&flat, true);
    (analytic, eps.iter().map(|&h| (shifted(h) - shifted(-h)) / (2.0 * h)).collect())
}

pub fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}
