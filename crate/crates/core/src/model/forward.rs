use super::{FusionKind, ModelConfig, ModelError, ModelParams};
use crate::data::Batch;
use crate::tensor::{Graph, Matrix, Tensor};

/// Graph leaves for one [`ModelParams`], mirroring its structure.
#[derive(Clone, Debug, PartialEq)]
pub struct ParamLeaves {
    pub encoders: Vec<Vec<(Tensor, Tensor)>>,
    pub gate: Option<(Tensor, Tensor)>,
    pub classifier: (Tensor, Tensor),
}

impl ParamLeaves {
    /// Adds every parameter of `params` as a leaf, in canonical order.
    pub fn bind(graph: &mut Graph, params: &ModelParams) -> Self {
        let flat: Vec<Tensor> = params.tensors().into_iter().map(|t| graph.leaf(t.clone())).collect();
        Self::from_flat(&params.config, &flat)
    }

    /// Rebuilds the structure from leaves listed in canonical order.
    pub fn from_flat(cfg: &ModelConfig, flat: &[Tensor]) -> Self {
        let mut it = flat.iter().copied();
        let mut pair = || (it.next().expect("too few leaves"), it.next().expect("too few leaves"));
        let encoders = (0..cfg.num_modalities())
            .map(|k| (0..cfg.layer_shapes(k).len()).map(|_| pair()).collect())
            .collect();
        let gate = (cfg.fusion == FusionKind::Gated).then(&mut pair);
        let classifier = pair();
        Self {
            encoders,
            gate,
            classifier,
        }
    }

    /// Leaves in canonical order.
    pub fn flat(&self) -> Vec<Tensor> {
        let mut out = Vec::new();
        for &(w, b) in self.encoders.iter().flatten() {
            out.push(w);
            out.push(b);
        }
        if let Some((w, b)) = self.gate {
            out.push(w);
            out.push(b);
        }
        out.push(self.classifier.0);
        out.push(self.classifier.1);
        out
    }
}

/// Node handles produced by one multimodal forward pass.
#[derive(Clone, Debug)]
pub struct ForwardPass {
    pub params: ParamLeaves,
    /// Raw encoder outputs `z_k`.
    pub representations: Vec<Tensor>,
    /// Grad-scale hooks wrapping each `z_k` on its way into fusion.
    pub hooks: Vec<Tensor>,
    pub fused: Tensor,
    /// `B × M` multimodal logits.
    pub fused_logits: Tensor,
    /// `B × M` logits of each modality alone, others zero-masked.
    pub unimodal_logits: Vec<Tensor>,
}

fn check_batch(cfg: &ModelConfig, features: &[Matrix]) -> Result<(), ModelError> {
    if features.len() != cfg.num_modalities() {
        return Err(ModelError::ModalityCount {
            expected: cfg.num_modalities(),
            found: features.len(),
        });
    }
    for (k, (f, &d)) in features.iter().zip(&cfg.input_dims).enumerate() {
        if f.cols() != d {
            return Err(ModelError::DimMismatch {
                modality: k,
                expected: d,
                found: f.cols(),
            });
        }
    }
    Ok(())
}

fn encode(graph: &mut Graph, layers: &[(Tensor, Tensor)], input: Tensor) -> Result<Tensor, ModelError> {
    let mut h = input;
    for &(w, b) in layers {
        let lin = graph.matmul(h, w)?;
        let lin = graph.add_bias(lin, b)?;
        h = graph.relu(lin)?;
    }
    Ok(h)
}

/// Runs fusion then the shared classifier. Returns `(z_f, logits)`.
fn fuse_and_classify(
    graph: &mut Graph,
    cfg: &ModelConfig,
    leaves: &ParamLeaves,
    reps: &[Tensor],
) -> Result<(Tensor, Tensor), ModelError> {
    let fused = match cfg.fusion {
        FusionKind::Concat => graph.concat(reps)?,
        FusionKind::Gated => {
            let (gw, gb) = leaves.gate.expect("gated fusion without gate parameters");
            let joint = graph.concat(reps)?;
            let h = graph.matmul(joint, gw)?;
            let h = graph.add_bias(h, gb)?;
            let s = graph.sigmoid(h)?;
            let gates = graph.row_softmax(s)?;
            let mut acc: Option<Tensor> = None;
            for (k, &z) in reps.iter().enumerate() {
                let g = graph.column(gates, k)?;
                let term = graph.hadamard(z, g)?;
                acc = Some(match acc {
                    None => term,
                    Some(a) => graph.add(a, term)?,
                });
            }
            acc.expect("at least one modality")
        }
    };
    let (w, b) = leaves.classifier;
    let logits = graph.matmul(fused, w)?;
    let logits = graph.add_bias(logits, b)?;
    Ok((fused, logits))
}

/// Logits for modality `k` alone: every other representation is replaced
/// by a zero mask before the shared fusion and classifier, so neither their
/// values nor their encoders take part.
pub fn unimodal_logits(
    graph: &mut Graph,
    cfg: &ModelConfig,
    leaves: &ParamLeaves,
    representations: &[Tensor],
    k: usize,
) -> Result<Tensor, ModelError> {
    if k >= representations.len() {
        return Err(ModelError::ModalityOutOfRange {
            index: k,
            count: representations.len(),
        });
    }
    let masked: Vec<Tensor> = representations
        .iter()
        .enumerate()
        .map(|(j, &z)| if j == k { Ok(z) } else { graph.zero_mask(z) })
        .collect::<Result<_, _>>()?;
    Ok(fuse_and_classify(graph, cfg, leaves, &masked)?.1)
}

/// Full forward over parameters that are already graph leaves.
pub fn forward_with_leaves(
    graph: &mut Graph,
    cfg: &ModelConfig,
    leaves: ParamLeaves,
    features: &[Matrix],
) -> Result<ForwardPass, ModelError> {
    check_batch(cfg, features)?;
    let mut representations = Vec::with_capacity(features.len());
    let mut hooks = Vec::with_capacity(features.len());
    for (k, x) in features.iter().enumerate() {
        let input = graph.leaf(x.clone());
        let z = encode(graph, &leaves.encoders[k], input)?;
        hooks.push(graph.grad_scale(z, 1.0)?);
        representations.push(z);
    }
    let (fused, fused_logits) = fuse_and_classify(graph, cfg, &leaves, &hooks)?;
    let unimodal = (0..features.len())
        .map(|k| unimodal_logits(graph, cfg, &leaves, &representations, k))
        .collect::<Result<_, _>>()?;
    Ok(ForwardPass {
        params: leaves,
        representations,
        hooks,
        fused,
        fused_logits,
        unimodal_logits: unimodal,
    })
}

/// Binds `params` into `graph` and runs the multimodal forward on `batch`.
pub fn forward_multimodal(
    graph: &mut Graph,
    params: &ModelParams,
    batch: &Batch,
) -> Result<ForwardPass, ModelError> {
    check_batch(&params.config, &batch.features)?;
    let leaves = ParamLeaves::bind(graph, params);
    forward_with_leaves(graph, &params.config, leaves, &batch.features)
}

/// Inference helper: fused and unimodal logits as plain matrices.
pub fn predict_logits(params: &ModelParams, features: &[Matrix]) -> Result<(Matrix, Vec<Matrix>), ModelError> {
    let mut graph = Graph::new();
    check_batch(&params.config, features)?;
    let leaves = ParamLeaves::bind(&mut graph, params);
    let pass = forward_with_leaves(&mut graph, &params.config, leaves, features)?;
    Ok((
        graph.value(pass.fused_logits).clone(),
        pass.unimodal_logits.iter().map(|&t| graph.value(t).clone()).collect(),
    ))
}
