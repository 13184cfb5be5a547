//! Minimal reverse-mode automatic differentiation over dense 2-D `f64`
//! tensors.
//!
//! A [`Graph`] is a tape rebuilt for every batch. Leaves hold parameters and
//! inputs; every primitive appends a node together with its backward rule.
//! The `grad_scale` primitive is the hook through which gradient modulation
//! reaches each modality encoder: it is the identity going forward and
//! multiplies the upstream gradient by a settable factor going backward.

mod gradcheck;
mod graph;
mod matrix;

pub use gradcheck::{finite_difference_check, FdReport};
pub use graph::{Graph, PrimitiveKind, Tensor};
pub use matrix::{log_sum_exp, softmax_row, Matrix};

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum TensorError {
    #[error("shape mismatch in {op}: {left:?} vs {right:?}")]
    ShapeMismatch {
        op: &'static str,
        left: (usize, usize),
        right: (usize, usize),
    },
    #[error("unknown primitive `{0}`")]
    UnknownPrimitive(String),
    #[error("{op} expects {expected} input(s), got {got}")]
    Arity {
        op: &'static str,
        expected: usize,
        got: usize,
    },
    #[error("{op} is missing attribute #{index}")]
    MissingAttribute { op: &'static str, index: usize },
    #[error("invalid attribute {value} for {op}")]
    InvalidAttribute { op: &'static str, value: f64 },
    #[error("{op} received a tensor from another graph")]
    ForeignTensor { op: &'static str },
    #[error("gradient scale must be finite and non-negative, got {0}")]
    InvalidScale(f64),
    #[error("node {0} is not a grad_scale node")]
    NotAGradScale(usize),
    #[error("label {label} at index {index} is out of range for {classes} classes")]
    LabelOutOfRange {
        index: usize,
        label: usize,
        classes: usize,
    },
    #[error("logits have {rows} rows but {labels} labels were given")]
    LabelCount { rows: usize, labels: usize },
    #[error("empty batch")]
    EmptyBatch,
    #[error("backward needs a scalar loss, got shape {0:?}")]
    NonScalarLoss((usize, usize)),
    #[error("non-finite forward value {value} (parameter {param}, entry {entry})")]
    NonFinite {
        value: f64,
        param: usize,
        entry: usize,
    },
}
