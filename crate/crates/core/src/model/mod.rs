//! K-modality classifier: per-modality relu MLP encoders, a fusion module
//! (concatenation or softmax-gated sum) and one linear classifier shared by
//! the multimodal path and every unimodal auxiliary path.

mod checkpoint;
mod forward;

pub use checkpoint::{load_checkpoint, read_checkpoint, save_checkpoint, write_checkpoint};
pub use forward::{forward_multimodal, forward_with_leaves, predict_logits, unimodal_logits, ForwardPass, ParamLeaves};

use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::tensor::{Matrix, TensorError};

#[derive(Debug, Error)]
pub enum ModelError {
    #[error("invalid model config: {}", .0.join("; "))]
    InvalidConfig(Vec<String>),
    #[error("modality {modality}: expected {expected} features, got {found}")]
    DimMismatch {
        modality: usize,
        expected: usize,
        found: usize,
    },
    #[error("batch has {found} modalities, model expects {expected}")]
    ModalityCount { expected: usize, found: usize },
    #[error("modality index {index} out of range for {count} modalities")]
    ModalityOutOfRange { index: usize, count: usize },
    #[error("checkpoint: {0}")]
    Checkpoint(String),
    #[error("checkpoint io: {0}")]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Tensor(#[from] TensorError),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FusionKind {
    /// `z_f = [z_0; …; z_{K−1}]`.
    Concat,
    /// `z_f = Σ_k g_k ⊙ z_k` with per-sample scalar gates
    /// `g = softmax(sigmoid(G·[z_0; …; z_{K−1}] + c))` over modalities.
    Gated,
}

impl fmt::Display for FusionKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            FusionKind::Concat => "concat",
            FusionKind::Gated => "gated",
        })
    }
}

impl FromStr for FusionKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "concat" => Ok(FusionKind::Concat),
            "gated" => Ok(FusionKind::Gated),
            other => Err(format!("unknown fusion kind `{other}` (expected concat or gated)")),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ModelConfig {
    /// Feature width of each modality.
    pub input_dims: Vec<usize>,
    /// Hidden layer widths, shared by every encoder. Encoder depth is
    /// `hidden.len() + 1` (linear → relu) blocks.
    pub hidden: Vec<usize>,
    /// Representation width `d_k` of each encoder output.
    pub rep_dims: Vec<usize>,
    pub fusion: FusionKind,
    pub num_classes: usize,
}

impl ModelConfig {
    pub fn num_modalities(&self) -> usize {
        self.input_dims.len()
    }

    /// Width of the fused representation.
    pub fn fused_dim(&self) -> usize {
        match self.fusion {
            FusionKind::Concat => self.rep_dims.iter().sum(),
            FusionKind::Gated => self.rep_dims.first().copied().unwrap_or(0),
        }
    }

    pub fn validate(&self) -> Result<(), ModelError> {
        let mut problems = Vec::new();
        let k = self.input_dims.len();
        if k < 2 {
            problems.push(format!("need at least 2 modalities, got {k}"));
        }
        if self.rep_dims.len() != k {
            problems.push(format!(
                "{} representation dims for {k} modalities",
                self.rep_dims.len()
            ));
        }
        if let Some(i) = self.input_dims.iter().position(|&d| d == 0) {
            problems.push(format!("modality {i} input dim is 0"));
        }
        if let Some(i) = self.rep_dims.iter().position(|&d| d == 0) {
            problems.push(format!("modality {i} representation dim is 0"));
        }
        if let Some(i) = self.hidden.iter().position(|&d| d == 0) {
            problems.push(format!("hidden layer {i} has width 0"));
        }
        if self.num_classes < 2 {
            problems.push(format!("need at least 2 classes, got {}", self.num_classes));
        }
        if self.fusion == FusionKind::Gated && self.rep_dims.windows(2).any(|w| w[0] != w[1]) {
            problems.push("gated fusion requires equal representation dims".into());
        }
        if problems.is_empty() {
            Ok(())
        } else {
            Err(ModelError::InvalidConfig(problems))
        }
    }

    fn layer_shapes(&self, k: usize) -> Vec<(usize, usize)> {
        let mut widths = vec![self.input_dims[k]];
        widths.extend(&self.hidden);
        widths.push(self.rep_dims[k]);
        widths.windows(2).map(|w| (w[0], w[1])).collect()
    }
}

/// Affine map applied as `x · weight + bias`; `weight` is `in × out`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Linear {
    pub weight: Matrix,
    pub bias: Matrix,
}

impl Linear {
    fn zeros(fan_in: usize, fan_out: usize) -> Self {
        Self {
            weight: Matrix::zeros(fan_in, fan_out),
            bias: Matrix::zeros(1, fan_out),
        }
    }

    fn xavier(fan_in: usize, fan_out: usize, rng: &mut ChaCha8Rng) -> Self {
        let limit = (6.0 / (fan_in + fan_out) as f64).sqrt();
        let data = (0..fan_in * fan_out)
            .map(|_| rng.random_range(-limit..limit))
            .collect();
        Self {
            weight: Matrix::from_vec(fan_in, fan_out, data),
            bias: Matrix::zeros(1, fan_out),
        }
    }
}

/// All trainable tensors of a model.
///
/// The classifier is stored as `fused_dim × M` (the transpose of the usual
/// `M × D` layout) so that logits are `z_f · W + b`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ModelParams {
    pub config: ModelConfig,
    pub encoders: Vec<Vec<Linear>>,
    pub gate: Option<Linear>,
    pub classifier: Linear,
}

impl ModelParams {
    fn build(cfg: &ModelConfig, mut make: impl FnMut(usize, usize) -> Linear) -> Self {
        let encoders = (0..cfg.num_modalities())
            .map(|k| cfg.layer_shapes(k).into_iter().map(|(i, o)| make(i, o)).collect())
            .collect();
        let gate = match cfg.fusion {
            FusionKind::Concat => None,
            FusionKind::Gated => Some(make(cfg.rep_dims.iter().sum(), cfg.num_modalities())),
        };
        let classifier = make(cfg.fused_dim(), cfg.num_classes);
        Self {
            config: cfg.clone(),
            encoders,
            gate,
            classifier,
        }
    }

    /// Zero-filled parameters with the right shapes.
    pub fn zeros(cfg: &ModelConfig) -> Result<Self, ModelError> {
        cfg.validate()?;
        Ok(Self::build(cfg, Linear::zeros))
    }

    /// Canonical tensor names, in the same order as [`ModelParams::tensors`].
    pub fn names(&self) -> Vec<String> {
        let mut names = Vec::new();
        for (k, layers) in self.encoders.iter().enumerate() {
            for l in 0..layers.len() {
                names.push(format!("encoder.{k}.layer.{l}.weight"));
                names.push(format!("encoder.{k}.layer.{l}.bias"));
            }
        }
        if self.gate.is_some() {
            names.push("fusion.gate.weight".into());
            names.push("fusion.gate.bias".into());
        }
        names.push("classifier.weight".into());
        names.push("classifier.bias".into());
        names
    }

    pub fn tensors(&self) -> Vec<&Matrix> {
        let mut out = Vec::new();
        for layer in self.encoders.iter().flatten() {
            out.push(&layer.weight);
            out.push(&layer.bias);
        }
        if let Some(g) = &self.gate {
            out.push(&g.weight);
            out.push(&g.bias);
        }
        out.push(&self.classifier.weight);
        out.push(&self.classifier.bias);
        out
    }

    pub fn tensors_mut(&mut self) -> Vec<&mut Matrix> {
        let mut out = Vec::new();
        for layer in self.encoders.iter_mut().flatten() {
            out.push(&mut layer.weight);
            out.push(&mut layer.bias);
        }
        if let Some(g) = &mut self.gate {
            out.push(&mut g.weight);
            out.push(&mut g.bias);
        }
        out.push(&mut self.classifier.weight);
        out.push(&mut self.classifier.bias);
        out
    }

    pub fn is_finite(&self) -> bool {
        self.tensors().iter().all(|t| t.is_finite())
    }

    pub fn num_parameters(&self) -> usize {
        self.tensors().iter().map(|t| t.len()).sum()
    }
}

/// Xavier-uniform weights from a seeded generator, zero biases.
pub fn init_model(cfg: &ModelConfig, seed: u64) -> Result<ModelParams, ModelError> {
    cfg.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    Ok(ModelParams::build(cfg, |i, o| Linear::xavier(i, o, &mut rng)))
}
