//! Asymmetric representation learning.
//!
//! Per batch, from the unimodal logits of every modality:
//!
//! * `d_k`: mean true-class softmax probability (how much the model
//!   currently relies on modality `k`);
//! * `q_k = 1 / H_k`: inverse mean prediction entropy, a stand-in for the
//!   inverse prediction variance of modality `k`;
//! * `a`: softmax of the target ratio `q₀/q₁` against the current ratio
//!   `d₀/d₁`, both scaled by the temperature. The modality that lags its
//!   variance-optimal share receives the larger coefficient;
//! * the fusion-path gradient into encoder `k` is rescaled to `g·(1 + a_k)`
//!   (or `g·a_k` without the residual term);
//! * `L = CE(p_f, y) + γ Σ_k CE(p_k, y)` regularizes unimodal bias.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::tensor::{log_sum_exp, softmax_row, Graph, Matrix, Tensor, TensorError};

/// Smallest modulation coefficient handed out. Keeps every `a_k` strictly
/// inside `(0, 1)` once the softmax saturates in `f64`.
pub const COEFFICIENT_FLOOR: f64 = 1e-15;

/// Dependency values are clamped to `[DEPENDENCY_FLOOR, 1 − DEPENDENCY_FLOOR]`.
pub const DEPENDENCY_FLOOR: f64 = 1e-12;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ArlError {
    #[error("empty batch")]
    EmptyBatch,
    #[error("need at least two modalities, got {0}")]
    TooFewModalities(usize),
    #[error("{what} has {found} entries, expected {expected}")]
    LengthMismatch {
        what: &'static str,
        expected: usize,
        found: usize,
    },
    #[error("label {label} at index {index} is out of range for {classes} classes")]
    LabelOutOfRange {
        index: usize,
        label: usize,
        classes: usize,
    },
    #[error("non-finite logit at row {row}, column {col}")]
    NonFinite { row: usize, col: usize },
    #[error("{what}[{index}] must be positive and finite, got {value}")]
    NonPositive {
        what: &'static str,
        index: usize,
        value: f64,
    },
    #[error("modulation coefficient {0} is outside (0, 1)")]
    CoefficientOutOfRange(f64),
    #[error("invalid ARL config: {}", .0.join("; "))]
    InvalidConfig(Vec<String>),
    #[error(transparent)]
    Tensor(#[from] TensorError),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ArlConfig {
    /// Modulation temperature `T > 0`.
    pub temperature: f64,
    /// Unimodal regularization weight `γ ≥ 0`.
    pub gamma: f64,
    /// Entropy floor; caps `q` at `1 / entropy_floor`.
    pub entropy_floor: f64,
    /// Unimodal bias regularization.
    pub use_ur: bool,
    /// Asymmetric learning coefficients.
    pub use_al: bool,
    /// Residual term in the gradient rescaling.
    pub use_gr: bool,
    /// Exponential-moving-average decay for `q` and `d`; `None` uses the
    /// raw per-batch values.
    pub ema_decay: Option<f64>,
}

impl Default for ArlConfig {
    fn default() -> Self {
        Self {
            temperature: 4.0,
            gamma: 4.0,
            entropy_floor: 1e-6,
            use_ur: true,
            use_al: true,
            use_gr: true,
            ema_decay: None,
        }
    }
}

impl ArlConfig {
    /// Every component switched off: plain multimodal cross-entropy.
    pub fn disabled() -> Self {
        Self {
            gamma: 0.0,
            use_ur: false,
            use_al: false,
            use_gr: false,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<(), ArlError> {
        let mut problems = Vec::new();
        if !(self.temperature > 0.0 && self.temperature.is_finite()) {
            problems.push(format!("temperature must be > 0, got {}", self.temperature));
        }
        if !(self.gamma >= 0.0 && self.gamma.is_finite()) {
            problems.push(format!("gamma must be >= 0, got {}", self.gamma));
        }
        if !(self.entropy_floor > 0.0 && self.entropy_floor.is_finite()) {
            problems.push(format!("entropy_floor must be > 0, got {}", self.entropy_floor));
        }
        if let Some(decay) = self.ema_decay {
            if !(0.0..1.0).contains(&decay) {
                problems.push(format!("ema_decay must be in [0, 1), got {decay}"));
            }
        }
        if problems.is_empty() {
            Ok(())
        } else {
            Err(ArlError::InvalidConfig(problems))
        }
    }
}

/// What the dependency ratio is steered towards.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Target {
    /// The inverse-variance ratio `q₀/q₁`.
    Variance,
    /// Equal reliance on every modality (ratio 1).
    Balanced,
}

/// Per-step statistics.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ArlState {
    pub q: Vec<f64>,
    pub d: Vec<f64>,
    /// Empty unless asymmetric learning is on.
    pub a: Vec<f64>,
    pub u: Vec<f64>,
    pub loss_fused: f64,
    pub loss_total: f64,
}

impl ArlState {
    pub fn q_ratio(&self) -> f64 {
        self.q[0] / self.q[1]
    }

    pub fn d_ratio(&self) -> f64 {
        self.d[0] / self.d[1]
    }

    pub fn record(&self, step: usize, epoch: usize) -> StepRecord {
        StepRecord {
            step,
            epoch,
            q: self.q.clone(),
            d: self.d.clone(),
            a: self.a.clone(),
            u: self.u.clone(),
            loss_fused: self.loss_fused,
            loss_total: self.loss_total,
        }
    }
}

/// One JSON Lines record per optimization step.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StepRecord {
    pub step: usize,
    pub epoch: usize,
    pub q: Vec<f64>,
    pub d: Vec<f64>,
    pub a: Vec<f64>,
    pub u: Vec<f64>,
    pub loss_fused: f64,
    pub loss_total: f64,
}

fn check_logits(logits: &Matrix) -> Result<(), ArlError> {
    if logits.rows() == 0 {
        return Err(ArlError::EmptyBatch);
    }
    if let Some(i) = logits.as_slice().iter().position(|v| !v.is_finite()) {
        return Err(ArlError::NonFinite {
            row: i / logits.cols(),
            col: i % logits.cols(),
        });
    }
    Ok(())
}

fn check_positive(what: &'static str, values: &[f64]) -> Result<(), ArlError> {
    match values.iter().position(|&v| !(v > 0.0 && v.is_finite())) {
        Some(index) => Err(ArlError::NonPositive {
            what,
            index,
            value: values[index],
        }),
        None => Ok(()),
    }
}

/// Mean true-class softmax probability of one modality's logits.
pub fn mean_true_class_probability(logits: &Matrix, labels: &[usize]) -> Result<f64, ArlError> {
    check_logits(logits)?;
    if labels.len() != logits.rows() {
        return Err(ArlError::LengthMismatch {
            what: "labels",
            expected: logits.rows(),
            found: labels.len(),
        });
    }
    let mut total = 0.0;
    for (r, &y) in labels.iter().enumerate() {
        if y >= logits.cols() {
            return Err(ArlError::LabelOutOfRange {
                index: r,
                label: y,
                classes: logits.cols(),
            });
        }
        let row = logits.row(r);
        total += (row[y] - log_sum_exp(row)).exp();
    }
    Ok((total / labels.len() as f64).clamp(DEPENDENCY_FLOOR, 1.0 - DEPENDENCY_FLOOR))
}

/// Per-modality dependency values `d_k` and the ratio `d₀ / d₁`.
#[derive(Clone, Debug, PartialEq)]
pub struct Dependency {
    pub d: Vec<f64>,
    pub ratio: f64,
}

pub fn dependency_ratio(unimodal_logits: &[Matrix], labels: &[usize]) -> Result<Dependency, ArlError> {
    if unimodal_logits.len() < 2 {
        return Err(ArlError::TooFewModalities(unimodal_logits.len()));
    }
    if labels.is_empty() {
        return Err(ArlError::EmptyBatch);
    }
    let d = unimodal_logits
        .iter()
        .map(|l| mean_true_class_probability(l, labels))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(Dependency { ratio: d[0] / d[1], d })
}

/// Mean Shannon entropy (natural log) of the row-wise softmax.
pub fn mean_entropy(logits: &Matrix) -> Result<f64, ArlError> {
    check_logits(logits)?;
    let mut total = 0.0;
    for r in 0..logits.rows() {
        let row = logits.row(r);
        let p = softmax_row(row);
        // H = logsumexp(x) − Σ p·x, which stays exact for saturated rows.
        let h = log_sum_exp(row) - p.iter().zip(row).map(|(p, x)| p * x).sum::<f64>();
        total += h.max(0.0);
    }
    Ok(total / logits.rows() as f64)
}

/// Inverse-variance proxy `q = 1 / max(H, entropy_floor)`.
pub fn variance_proxy(logits: &Matrix, entropy_floor: f64) -> Result<f64, ArlError> {
    Ok(1.0 / mean_entropy(logits)?.max(entropy_floor))
}

fn softmax_with_floor(scores: &[f64]) -> Vec<f64> {
    let mut a = softmax_row(scores);
    let top = a
        .iter()
        .enumerate()
        .fold(0, |best, (i, &v)| if v > a[best] { i } else { best });
    let mut rest = 0.0;
    for (i, v) in a.iter_mut().enumerate() {
        if i != top {
            *v = v.max(COEFFICIENT_FLOOR);
            rest += *v;
        }
    }
    a[top] = 1.0 - rest;
    a
}

/// Modulation coefficients.
///
/// Two modalities: `a = softmax([T·q₀/q₁, T·d₀/d₁])`. More modalities:
/// `a = softmax(T·r)` with `r_k = (q_k / Σq) / (d_k / Σd)`, the ratio of
/// each modality's target share to its current share.
pub fn modulation_coefficients(q: &[f64], d: &[f64], temperature: f64) -> Result<Vec<f64>, ArlError> {
    if q.len() < 2 {
        return Err(ArlError::TooFewModalities(q.len()));
    }
    if d.len() != q.len() {
        return Err(ArlError::LengthMismatch {
            what: "d",
            expected: q.len(),
            found: d.len(),
        });
    }
    check_positive("q", q)?;
    check_positive("d", d)?;
    if !(temperature > 0.0 && temperature.is_finite()) {
        return Err(ArlError::InvalidConfig(vec![format!(
            "temperature must be > 0, got {temperature}"
        )]));
    }
    let scores: Vec<f64> = if q.len() == 2 {
        vec![q[0] / q[1] * temperature, d[0] / d[1] * temperature]
    } else {
        let qs: f64 = q.iter().sum();
        let ds: f64 = d.iter().sum();
        q.iter()
            .zip(d)
            .map(|(qk, dk)| temperature * (qk / qs) / (dk / ds))
            .collect()
    };
    Ok(softmax_with_floor(&scores))
}

/// Coefficients for a given target: [`Target::Balanced`] replaces every
/// `q_k` by 1.
pub fn coefficients_for_target(q: &[f64], d: &[f64], temperature: f64, target: Target) -> Result<Vec<f64>, ArlError> {
    match target {
        Target::Variance => modulation_coefficients(q, d, temperature),
        Target::Balanced => modulation_coefficients(&vec![1.0; q.len()], d, temperature),
    }
}

/// Factor the grad-scale hook applies to the fusion-path gradient of one
/// encoder: `1 + a_k` with the residual term, `a_k` without.
pub fn modulate_gradient(a_k: f64, residual: bool) -> Result<f64, ArlError> {
    if !(a_k > 0.0 && a_k < 1.0) {
        return Err(ArlError::CoefficientOutOfRange(a_k));
    }
    Ok(if residual { 1.0 + a_k } else { a_k })
}

/// Exponential moving average of `q` and `d` across steps.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct EmaSmoother {
    q: Option<Vec<f64>>,
    d: Option<Vec<f64>>,
}

impl EmaSmoother {
    pub fn update(&mut self, decay: f64, q: &[f64], d: &[f64]) -> (Vec<f64>, Vec<f64>) {
        fn blend(slot: &mut Option<Vec<f64>>, decay: f64, x: &[f64]) -> Vec<f64> {
            let next = match slot {
                None => x.to_vec(),
                Some(prev) => prev.iter().zip(x).map(|(p, v)| decay * p + (1.0 - decay) * v).collect(),
            };
            *slot = Some(next.clone());
            next
        }
        (blend(&mut self.q, decay, q), blend(&mut self.d, decay, d))
    }
}

/// Builds the training objective for one batch and the statistics that
/// drive modulation.
#[derive(Clone, Debug)]
pub struct ArlObjective {
    pub config: ArlConfig,
    pub target: Target,
    smoother: EmaSmoother,
}

impl ArlObjective {
    pub fn new(config: ArlConfig, target: Target) -> Result<Self, ArlError> {
        config.validate()?;
        Ok(Self {
            config,
            target,
            smoother: EmaSmoother::default(),
        })
    }

    /// Returns the total-loss node and the batch statistics.
    pub fn loss(
        &mut self,
        graph: &mut Graph,
        fused_logits: Tensor,
        unimodal_logits: &[Tensor],
        labels: &[usize],
    ) -> Result<(Tensor, ArlState), ArlError> {
        if unimodal_logits.len() < 2 {
            return Err(ArlError::TooFewModalities(unimodal_logits.len()));
        }
        let cfg = &self.config;
        let fused = graph.softmax_cross_entropy(fused_logits, labels)?;
        let mut unimodal = Vec::with_capacity(unimodal_logits.len());
        for &p in unimodal_logits {
            unimodal.push(graph.softmax_cross_entropy(p, labels)?);
        }
        let u: Vec<f64> = unimodal.iter().map(|&t| graph.value(t).get(0, 0)).collect();

        let total = if cfg.use_ur {
            let mut acc = unimodal[0];
            for &t in &unimodal[1..] {
                acc = graph.add(acc, t)?;
            }
            let weighted = graph.scale(acc, cfg.gamma)?;
            graph.add(fused, weighted)?
        } else {
            fused
        };

        let values: Vec<Matrix> = unimodal_logits.iter().map(|&t| graph.value(t).clone()).collect();
        let dep = dependency_ratio(&values, labels)?;
        let q = values
            .iter()
            .map(|l| variance_proxy(l, cfg.entropy_floor))
            .collect::<Result<Vec<_>, _>>()?;

        let a = if cfg.use_al {
            let (qs, ds) = match cfg.ema_decay {
                Some(decay) => self.smoother.update(decay, &q, &dep.d),
                None => (q.clone(), dep.d.clone()),
            };
            coefficients_for_target(&qs, &ds, cfg.temperature, self.target)?
        } else {
            Vec::new()
        };

        let state = ArlState {
            q,
            d: dep.d,
            a,
            u,
            loss_fused: graph.value(fused).get(0, 0),
            loss_total: graph.value(total).get(0, 0),
        };
        Ok((total, state))
    }

    /// Scale for each grad-scale hook given the coefficients in `state`.
    /// All ones when asymmetric learning is off.
    pub fn hook_scales(&self, state: &ArlState) -> Result<Vec<f64>, ArlError> {
        if !self.config.use_al || state.a.is_empty() {
            return Ok(vec![1.0; state.q.len()]);
        }
        state
            .a
            .iter()
            .map(|&a| modulate_gradient(a, self.config.use_gr))
            .collect()
    }
}

/// One-shot objective with the variance target.
pub fn arl_loss(
    graph: &mut Graph,
    fused_logits: Tensor,
    unimodal_logits: &[Tensor],
    labels: &[usize],
    cfg: &ArlConfig,
) -> Result<(Tensor, ArlState), ArlError> {
    ArlObjective::new(cfg.clone(), Target::Variance)?.loss(graph, fused_logits, unimodal_logits, labels)
}
