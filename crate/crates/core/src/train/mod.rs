//! Training loop with pluggable strategy, SGD with momentum, evaluation
//! and per-epoch reporting.
//!
//! One iteration: forward the batch; build the objective; derive the
//! per-modality statistics from the unimodal logits; point every encoder's
//! grad-scale hook at its modulation factor; backward; SGD step.

mod metrics;
mod sgd;

pub use metrics::{classification_metrics, evaluate, Metrics};
pub use sgd::{sgd_update, OptimizerConfig, SgdState};

use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::arl::{
    dependency_ratio, variance_proxy, ArlConfig, ArlError, ArlObjective, ArlState, StepRecord, Target,
};
use crate::data::{batches, Dataset};
use crate::model::{forward_multimodal, init_model, ModelConfig, ModelError, ModelParams};
use crate::tensor::{Graph, Matrix, TensorError};

#[derive(Debug, Error)]
pub enum TrainError {
    #[error("invalid optimizer config: {}", .0.join("; "))]
    InvalidOptimizer(Vec<String>),
    #[error("dataset does not fit the model: {0}")]
    Incompatible(String),
    #[error("shape mismatch in optimizer: {0}")]
    ShapeMismatch(String),
    #[error(
        "non-finite {what} at epoch {epoch}, iteration {iteration}: \
         loss_fused={loss_fused}, loss_total={loss_total}, unimodal={unimodal:?}"
    )]
    NonFinite {
        what: &'static str,
        epoch: usize,
        iteration: usize,
        loss_fused: f64,
        loss_total: f64,
        unimodal: Vec<f64>,
    },
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Arl(#[from] ArlError),
    #[error(transparent)]
    Tensor(#[from] TensorError),
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
}

/// How the encoders are optimized.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum StrategyKind {
    /// Multimodal cross-entropy only.
    Vanilla,
    /// ARL machinery steering the dependency ratio to 1.
    Balanced(ArlConfig),
    /// ARL machinery steering the dependency ratio to the variance ratio.
    Arl(ArlConfig),
}

impl StrategyKind {
    pub fn name(&self) -> &'static str {
        match self {
            StrategyKind::Vanilla => "vanilla",
            StrategyKind::Balanced(_) => "balanced",
            StrategyKind::Arl(_) => "arl",
        }
    }
}

/// Metrics for one epoch. Loss and modulation fields are means over the
/// epoch's iterations; accuracy and F1 are measured after the epoch.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EpochRecord {
    pub epoch: usize,
    pub train_accuracy: f64,
    pub train_macro_f1: f64,
    pub test_accuracy: f64,
    pub test_macro_f1: f64,
    pub loss_fused: f64,
    pub loss_total: f64,
    pub unimodal_loss: Vec<f64>,
    /// Mean `q₀/q₁`.
    pub q_ratio: f64,
    /// Mean `d₀/d₁`.
    pub d_ratio: f64,
    /// Mean `a_k`; empty when no coefficients were computed.
    pub a_mean: Vec<f64>,
    /// Min and max over iterations of `‖propagated‖ / ‖upstream‖` at each
    /// encoder's hook (the fusion-path gradient scaling actually applied).
    pub grad_ratio_min: Vec<f64>,
    pub grad_ratio_max: Vec<f64>,
}

impl EpochRecord {
    /// `|ln(d-ratio / q-ratio)|`: distance of the dependency ratio from
    /// its variance target.
    pub fn log_gap(&self) -> f64 {
        (self.d_ratio / self.q_ratio).ln().abs()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrainReport {
    pub strategy: StrategyKind,
    pub epochs: Vec<EpochRecord>,
    pub steps: Vec<StepRecord>,
    pub final_train: Metrics,
    pub final_test: Metrics,
    /// Excluded from equality-sensitive outputs.
    pub wall_clock_secs: f64,
    pub checkpoint: Option<PathBuf>,
}

impl TrainReport {
    /// Everything except wall-clock time; identical for identical inputs.
    pub fn deterministic_eq(&self, other: &TrainReport) -> bool {
        self.strategy == other.strategy
            && self.epochs == other.epochs
            && self.steps == other.steps
            && self.final_train == other.final_train
            && self.final_test == other.final_test
    }

    /// One JSON object per epoch, newline-terminated.
    pub fn write_epochs_jsonl(&self, out: &mut impl Write) -> std::io::Result<()> {
        for e in &self.epochs {
            serde_json::to_writer(&mut *out, e)?;
            out.write_all(b"\n")?;
        }
        Ok(())
    }

    /// One JSON object per optimization step, newline-terminated.
    pub fn write_steps_jsonl(&self, out: &mut impl Write) -> std::io::Result<()> {
        for s in &self.steps {
            serde_json::to_writer(&mut *out, s)?;
            out.write_all(b"\n")?;
        }
        Ok(())
    }

    pub fn save_epochs_jsonl(&self, path: impl AsRef<Path>) -> std::io::Result<()> {
        let mut buf = Vec::new();
        self.write_epochs_jsonl(&mut buf)?;
        std::fs::write(path, buf)
    }

    pub fn save_steps_jsonl(&self, path: impl AsRef<Path>) -> std::io::Result<()> {
        let mut buf = Vec::new();
        self.write_steps_jsonl(&mut buf)?;
        std::fs::write(path, buf)
    }
}

/// A finished run: its report and final parameters.
#[derive(Clone, Debug)]
pub struct TrainOutcome {
    pub report: TrainReport,
    pub params: ModelParams,
}

fn check_compatible(cfg: &ModelConfig, ds: &Dataset) -> Result<(), TrainError> {
    if ds.dims() != cfg.input_dims {
        return Err(TrainError::Incompatible(format!(
            "{} split has modality dims {:?}, model expects {:?}",
            match ds.split() {
                crate::data::Split::Train => "train",
                crate::data::Split::Test => "test",
            },
            ds.dims(),
            cfg.input_dims
        )));
    }
    if ds.num_classes() != cfg.num_classes {
        return Err(TrainError::Incompatible(format!(
            "dataset has {} classes, model expects {}",
            ds.num_classes(),
            cfg.num_classes
        )));
    }
    Ok(())
}

/// Seed for the batch order of `epoch`.
pub fn epoch_seed(seed: u64, epoch: usize) -> u64 {
    seed.wrapping_mul(0x9E37_79B9_7F4A_7C15) ^ (epoch as u64).wrapping_add(1).wrapping_mul(0xD1B5_4A32_D192_ED03)
}

struct EpochAccumulator {
    iterations: usize,
    loss_fused: f64,
    loss_total: f64,
    unimodal: Vec<f64>,
    q_ratio: f64,
    d_ratio: f64,
    a_sum: Vec<f64>,
    a_count: usize,
    ratio_min: Vec<f64>,
    ratio_max: Vec<f64>,
}

impl EpochAccumulator {
    fn new(k: usize) -> Self {
        Self {
            iterations: 0,
            loss_fused: 0.0,
            loss_total: 0.0,
            unimodal: vec![0.0; k],
            q_ratio: 0.0,
            d_ratio: 0.0,
            a_sum: vec![0.0; k],
            a_count: 0,
            ratio_min: vec![f64::INFINITY; k],
            ratio_max: vec![f64::NEG_INFINITY; k],
        }
    }

    fn add(&mut self, state: &ArlState, ratios: &[Option<f64>]) {
        self.iterations += 1;
        self.loss_fused += state.loss_fused;
        self.loss_total += state.loss_total;
        for (acc, u) in self.unimodal.iter_mut().zip(&state.u) {
            *acc += u;
        }
        self.q_ratio += state.q_ratio();
        self.d_ratio += state.d_ratio();
        if !state.a.is_empty() {
            self.a_count += 1;
            for (acc, a) in self.a_sum.iter_mut().zip(&state.a) {
                *acc += a;
            }
        }
        for (k, r) in ratios.iter().enumerate() {
            if let Some(r) = r {
                self.ratio_min[k] = self.ratio_min[k].min(*r);
                self.ratio_max[k] = self.ratio_max[k].max(*r);
            }
        }
    }

    fn finish(self, epoch: usize, train: &Metrics, test: &Metrics) -> EpochRecord {
        let n = self.iterations.max(1) as f64;
        let fix = |v: Vec<f64>| v.into_iter().map(|x| if x.is_finite() { x } else { 0.0 }).collect();
        EpochRecord {
            epoch,
            train_accuracy: train.accuracy,
            train_macro_f1: train.macro_f1,
            test_accuracy: test.accuracy,
            test_macro_f1: test.macro_f1,
            loss_fused: self.loss_fused / n,
            loss_total: self.loss_total / n,
            unimodal_loss: self.unimodal.iter().map(|u| u / n).collect(),
            q_ratio: self.q_ratio / n,
            d_ratio: self.d_ratio / n,
            a_mean: if self.a_count == 0 {
                Vec::new()
            } else {
                self.a_sum.iter().map(|a| a / self.a_count as f64).collect()
            },
            grad_ratio_min: fix(self.ratio_min),
            grad_ratio_max: fix(self.ratio_max),
        }
    }
}

/// Plain multimodal cross-entropy with the same bookkeeping as the ARL
/// objective.
fn vanilla_loss(
    graph: &mut Graph,
    fused_logits: crate::tensor::Tensor,
    unimodal_logits: &[crate::tensor::Tensor],
    labels: &[usize],
    entropy_floor: f64,
) -> Result<(crate::tensor::Tensor, ArlState), TrainError> {
    let fused = graph.softmax_cross_entropy(fused_logits, labels)?;
    let mut u = Vec::with_capacity(unimodal_logits.len());
    for &p in unimodal_logits {
        let ce = graph.softmax_cross_entropy(p, labels)?;
        u.push(graph.value(ce).get(0, 0));
    }
    let values: Vec<Matrix> = unimodal_logits.iter().map(|&t| graph.value(t).clone()).collect();
    let dep = dependency_ratio(&values, labels)?;
    let q = values
        .iter()
        .map(|l| variance_proxy(l, entropy_floor))
        .collect::<Result<Vec<_>, _>>()?;
    let loss = graph.value(fused).get(0, 0);
    Ok((
        fused,
        ArlState {
            q,
            d: dep.d,
            a: Vec::new(),
            u,
            loss_fused: loss,
            loss_total: loss,
        },
    ))
}

/// Trains a freshly initialized model (seeded by `opt.seed`) on `train_set`,
/// evaluating on `test_set` after every epoch.
pub fn train(
    model_cfg: &ModelConfig,
    train_set: &Dataset,
    test_set: &Dataset,
    strategy: &StrategyKind,
    opt: &OptimizerConfig,
) -> Result<TrainOutcome, TrainError> {
    let params = init_model(model_cfg, opt.seed)?;
    train_from(params, train_set, test_set, strategy, opt)
}

/// Like [`train`] but starting from the given parameters.
pub fn train_from(
    mut params: ModelParams,
    train_set: &Dataset,
    test_set: &Dataset,
    strategy: &StrategyKind,
    opt: &OptimizerConfig,
) -> Result<TrainOutcome, TrainError> {
    let started = Instant::now();
    opt.validate()?;
    let model_cfg = params.config.clone();
    model_cfg.validate()?;
    check_compatible(&model_cfg, train_set)?;
    check_compatible(&model_cfg, test_set)?;
    if train_set.is_empty() {
        return Err(TrainError::Incompatible("training set is empty".into()));
    }
    let k = model_cfg.num_modalities();

    let mut objective = match strategy {
        StrategyKind::Vanilla => None,
        StrategyKind::Balanced(cfg) => Some(ArlObjective::new(cfg.clone(), Target::Balanced)?),
        StrategyKind::Arl(cfg) => Some(ArlObjective::new(cfg.clone(), Target::Variance)?),
    };
    let entropy_floor = ArlConfig::default().entropy_floor;

    let mut sgd = SgdState::default();
    let mut epochs = Vec::with_capacity(opt.epochs);
    let mut steps = Vec::new();
    let mut step = 0;

    for epoch in 1..=opt.epochs {
        let mut acc = EpochAccumulator::new(k);
        for (iteration, batch) in batches(train_set, opt.batch_size, epoch_seed(opt.seed, epoch))
            .into_iter()
            .enumerate()
        {
            let mut graph = Graph::new();
            let pass = forward_multimodal(&mut graph, &params, &batch)?;
            let logits_finite = graph.value(pass.fused_logits).is_finite()
                && pass.unimodal_logits.iter().all(|&t| graph.value(t).is_finite());
            if !logits_finite {
                return Err(TrainError::NonFinite {
                    what: "logits",
                    epoch,
                    iteration,
                    loss_fused: f64::NAN,
                    loss_total: f64::NAN,
                    unimodal: Vec::new(),
                });
            }
            let (loss, state) = match objective.as_mut() {
                None => vanilla_loss(
                    &mut graph,
                    pass.fused_logits,
                    &pass.unimodal_logits,
                    &batch.labels,
                    entropy_floor,
                )?,
                Some(obj) => obj.loss(&mut graph, pass.fused_logits, &pass.unimodal_logits, &batch.labels)?,
            };
            let non_finite = |what, state: &ArlState| TrainError::NonFinite {
                what,
                epoch,
                iteration,
                loss_fused: state.loss_fused,
                loss_total: state.loss_total,
                unimodal: state.u.clone(),
            };
            if !state.loss_total.is_finite() || !state.loss_fused.is_finite() {
                return Err(non_finite("loss", &state));
            }

            let scales = match &objective {
                None => vec![1.0; k],
                Some(obj) => obj.hook_scales(&state)?,
            };
            for (&hook, &s) in pass.hooks.iter().zip(&scales) {
                graph.set_grad_scale(hook, s)?;
            }
            graph.backward(loss)?;

            let ratios: Vec<Option<f64>> = pass
                .hooks
                .iter()
                .map(|&h| match graph.hook_flow(h) {
                    Some((up, down)) if up > 0.0 => Some(down / up),
                    _ => None,
                })
                .collect();
            let grads: Vec<Matrix> = pass.params.flat().iter().map(|&t| graph.grad(t).clone()).collect();
            if grads.iter().any(|g| !g.is_finite()) {
                return Err(non_finite("gradient", &state));
            }
            sgd_update(&mut params.tensors_mut(), &grads, &mut sgd, opt)?;
            if !params.is_finite() {
                return Err(non_finite("parameters", &state));
            }

            acc.add(&state, &ratios);
            step += 1;
            steps.push(state.record(step, epoch));
        }
        let train_metrics = evaluate(&params, train_set)?;
        let test_metrics = evaluate(&params, test_set)?;
        epochs.push(acc.finish(epoch, &train_metrics, &test_metrics));
    }

    let final_train = evaluate(&params, train_set)?;
    let final_test = if test_set.is_empty() {
        final_train.clone()
    } else {
        evaluate(&params, test_set)?
    };
    Ok(TrainOutcome {
        report: TrainReport {
            strategy: strategy.clone(),
            epochs,
            steps,
            final_train,
            final_test,
            wall_clock_secs: started.elapsed().as_secs_f64(),
            checkpoint: None,
        },
        params,
    })
}
