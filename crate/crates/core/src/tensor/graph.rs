use std::fmt;
use std::str::FromStr;

use super::matrix::{log_sum_exp, softmax_row, Matrix};
use super::TensorError;

/// Handle to a node in a [`Graph`].
///
/// Handles are only meaningful for the graph that issued them.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Tensor(usize);

impl Tensor {
    pub fn index(self) -> usize {
        self.0
    }
}

/// Primitive operations that can be recorded on the tape.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum PrimitiveKind {
    MatMul,
    AddBias,
    Add,
    Relu,
    Sigmoid,
    Concat,
    Hadamard,
    ZeroMask,
    GradScale,
    RowSoftmax,
    Column,
    Sum,
    Scale,
}

impl PrimitiveKind {
    pub fn name(self) -> &'static str {
        match self {
            PrimitiveKind::MatMul => "matmul",
            PrimitiveKind::AddBias => "add_bias",
            PrimitiveKind::Add => "add",
            PrimitiveKind::Relu => "relu",
            PrimitiveKind::Sigmoid => "sigmoid",
            PrimitiveKind::Concat => "concat",
            PrimitiveKind::Hadamard => "hadamard",
            PrimitiveKind::ZeroMask => "zero_mask",
            PrimitiveKind::GradScale => "grad_scale",
            PrimitiveKind::RowSoftmax => "row_softmax",
            PrimitiveKind::Column => "column",
            PrimitiveKind::Sum => "sum",
            PrimitiveKind::Scale => "scale",
        }
    }

    const ALL: [PrimitiveKind; 13] = [
        PrimitiveKind::MatMul,
        PrimitiveKind::AddBias,
        PrimitiveKind::Add,
        PrimitiveKind::Relu,
        PrimitiveKind::Sigmoid,
        PrimitiveKind::Concat,
        PrimitiveKind::Hadamard,
        PrimitiveKind::ZeroMask,
        PrimitiveKind::GradScale,
        PrimitiveKind::RowSoftmax,
        PrimitiveKind::Column,
        PrimitiveKind::Sum,
        PrimitiveKind::Scale,
    ];
}

impl fmt::Display for PrimitiveKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for PrimitiveKind {
    type Err = TensorError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        PrimitiveKind::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| TensorError::UnknownPrimitive(s.to_string()))
    }
}

#[derive(Clone, Debug)]
enum Op {
    MatMul(Tensor, Tensor),
    AddBias(Tensor, Tensor),
    Add(Tensor, Tensor),
    Relu(Tensor),
    Sigmoid(Tensor),
    Concat(Vec<Tensor>),
    Hadamard(Tensor, Tensor),
    ZeroMask(Tensor),
    GradScale { input: Tensor, scale: f64 },
    RowSoftmax(Tensor),
    Column(Tensor, usize),
    Sum(Tensor),
    Scale(Tensor, f64),
    SoftmaxCrossEntropy {
        logits: Tensor,
        labels: Vec<usize>,
        probs: Matrix,
    },
}

#[derive(Clone, Debug)]
struct Node {
    value: Matrix,
    grad: Matrix,
    op: Option<Op>,
    /// `(‖upstream‖, ‖propagated‖)` for grad-scale nodes after the last backward.
    hook_flow: Option<(f64, f64)>,
}

/// Define-by-run tape of dense tensors.
///
/// Nodes are appended in construction order, which is a valid topological
/// order, so backward is a single reverse sweep.
#[derive(Clone, Debug, Default)]
pub struct Graph {
    nodes: Vec<Node>,
}

impl Graph {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    fn push(&mut self, value: Matrix, op: Option<Op>) -> Tensor {
        let grad = Matrix::zeros(value.rows(), value.cols());
        self.nodes.push(Node {
            value,
            grad,
            op,
            hook_flow: None,
        });
        Tensor(self.nodes.len() - 1)
    }

    /// Adds a leaf (parameter or input) to the graph.
    pub fn leaf(&mut self, value: Matrix) -> Tensor {
        self.push(value, None)
    }

    pub fn value(&self, t: Tensor) -> &Matrix {
        &self.nodes[t.0].value
    }

    pub fn grad(&self, t: Tensor) -> &Matrix {
        &self.nodes[t.0].grad
    }

    pub fn shape(&self, t: Tensor) -> (usize, usize) {
        self.nodes[t.0].value.shape()
    }

    pub fn is_leaf(&self, t: Tensor) -> bool {
        self.nodes[t.0].op.is_none()
    }

    /// Inputs of the operation that produced `t`; empty for leaves.
    pub fn inputs(&self, t: Tensor) -> Vec<Tensor> {
        match &self.nodes[t.0].op {
            None => Vec::new(),
            Some(op) => match op {
                Op::MatMul(a, b) | Op::AddBias(a, b) | Op::Add(a, b) | Op::Hadamard(a, b) => vec![*a, *b],
                Op::Relu(x)
                | Op::Sigmoid(x)
                | Op::ZeroMask(x)
                | Op::RowSoftmax(x)
                | Op::Column(x, _)
                | Op::Sum(x)
                | Op::Scale(x, _) => vec![*x],
                Op::GradScale { input, .. } => vec![*input],
                Op::Concat(parts) => parts.clone(),
                Op::SoftmaxCrossEntropy { logits, .. } => vec![*logits],
            },
        }
    }

    pub fn zero_grad(&mut self) {
        for n in &mut self.nodes {
            n.grad.fill(0.0);
            n.hook_flow = None;
        }
    }

    fn check_owned(&self, t: Tensor, op: PrimitiveKind) -> Result<(), TensorError> {
        if t.0 < self.nodes.len() {
            Ok(())
        } else {
            Err(TensorError::ForeignTensor { op: op.name() })
        }
    }

    fn mismatch(&self, op: PrimitiveKind, a: Tensor, b: Tensor) -> TensorError {
        TensorError::ShapeMismatch {
            op: op.name(),
            left: self.shape(a),
            right: self.shape(b),
        }
    }

    /// Generic entry point: dispatches `kind` over `inputs` with scalar `attrs`.
    ///
    /// `grad_scale` and `scale` take their factor from `attrs[0]`; `column`
    /// takes its index from `attrs[0]`.
    pub fn apply_primitive(
        &mut self,
        kind: PrimitiveKind,
        inputs: &[Tensor],
        attrs: &[f64],
    ) -> Result<Tensor, TensorError> {
        let arity = |n: usize| -> Result<(), TensorError> {
            if inputs.len() == n {
                Ok(())
            } else {
                Err(TensorError::Arity {
                    op: kind.name(),
                    expected: n,
                    got: inputs.len(),
                })
            }
        };
        let attr = |i: usize| -> Result<f64, TensorError> {
            attrs.get(i).copied().ok_or(TensorError::MissingAttribute {
                op: kind.name(),
                index: i,
            })
        };
        match kind {
            PrimitiveKind::MatMul => {
                arity(2)?;
                self.matmul(inputs[0], inputs[1])
            }
            PrimitiveKind::AddBias => {
                arity(2)?;
                self.add_bias(inputs[0], inputs[1])
            }
            PrimitiveKind::Add => {
                arity(2)?;
                self.add(inputs[0], inputs[1])
            }
            PrimitiveKind::Relu => {
                arity(1)?;
                self.relu(inputs[0])
            }
            PrimitiveKind::Sigmoid => {
                arity(1)?;
                self.sigmoid(inputs[0])
            }
            PrimitiveKind::Concat => self.concat(inputs),
            PrimitiveKind::Hadamard => {
                arity(2)?;
                self.hadamard(inputs[0], inputs[1])
            }
            PrimitiveKind::ZeroMask => {
                arity(1)?;
                self.zero_mask(inputs[0])
            }
            PrimitiveKind::GradScale => {
                arity(1)?;
                self.grad_scale(inputs[0], attr(0)?)
            }
            PrimitiveKind::RowSoftmax => {
                arity(1)?;
                self.row_softmax(inputs[0])
            }
            PrimitiveKind::Column => {
                arity(1)?;
                let k = attr(0)?;
                if k < 0.0 || k.fract() != 0.0 {
                    return Err(TensorError::InvalidAttribute {
                        op: kind.name(),
                        value: k,
                    });
                }
                self.column(inputs[0], k as usize)
            }
            PrimitiveKind::Sum => {
                arity(1)?;
                self.sum(inputs[0])
            }
            PrimitiveKind::Scale => {
                arity(1)?;
                self.scale(inputs[0], attr(0)?)
            }
        }
    }

    /// `a · b`.
    pub fn matmul(&mut self, a: Tensor, b: Tensor) -> Result<Tensor, TensorError> {
        let kind = PrimitiveKind::MatMul;
        self.check_owned(a, kind)?;
        self.check_owned(b, kind)?;
        if self.value(a).cols() != self.value(b).rows() {
            return Err(self.mismatch(kind, a, b));
        }
        let value = self.value(a).matmul(self.value(b));
        Ok(self.push(value, Some(Op::MatMul(a, b))))
    }

    /// Adds a `1 × cols` bias row to every row of `x`.
    pub fn add_bias(&mut self, x: Tensor, bias: Tensor) -> Result<Tensor, TensorError> {
        let kind = PrimitiveKind::AddBias;
        self.check_owned(x, kind)?;
        self.check_owned(bias, kind)?;
        let (rows, cols) = self.shape(x);
        if self.shape(bias) != (1, cols) {
            return Err(self.mismatch(kind, x, bias));
        }
        let mut value = self.value(x).clone();
        let b = self.value(bias).as_slice().to_vec();
        for r in 0..rows {
            for (v, bj) in value.row_mut(r).iter_mut().zip(&b) {
                *v += bj;
            }
        }
        Ok(self.push(value, Some(Op::AddBias(x, bias))))
    }

    pub fn add(&mut self, a: Tensor, b: Tensor) -> Result<Tensor, TensorError> {
        let kind = PrimitiveKind::Add;
        self.check_owned(a, kind)?;
        self.check_owned(b, kind)?;
        if self.shape(a) != self.shape(b) {
            return Err(self.mismatch(kind, a, b));
        }
        let mut value = self.value(a).clone();
        value.add_assign(self.value(b));
        Ok(self.push(value, Some(Op::Add(a, b))))
    }

    pub fn relu(&mut self, x: Tensor) -> Result<Tensor, TensorError> {
        self.check_owned(x, PrimitiveKind::Relu)?;
        let value = self.value(x).map(|v| if v > 0.0 { v } else { 0.0 });
        Ok(self.push(value, Some(Op::Relu(x))))
    }

    pub fn sigmoid(&mut self, x: Tensor) -> Result<Tensor, TensorError> {
        self.check_owned(x, PrimitiveKind::Sigmoid)?;
        let value = self.value(x).map(|v| {
            if v >= 0.0 {
                1.0 / (1.0 + (-v).exp())
            } else {
                let e = v.exp();
                e / (1.0 + e)
            }
        });
        Ok(self.push(value, Some(Op::Sigmoid(x))))
    }

    /// Column-wise concatenation; all inputs must share a row count.
    pub fn concat(&mut self, parts: &[Tensor]) -> Result<Tensor, TensorError> {
        let kind = PrimitiveKind::Concat;
        let first = *parts.first().ok_or(TensorError::Arity {
            op: kind.name(),
            expected: 1,
            got: 0,
        })?;
        for &p in parts {
            self.check_owned(p, kind)?;
            if self.value(p).rows() != self.value(first).rows() {
                return Err(self.mismatch(kind, first, p));
            }
        }
        let rows = self.value(first).rows();
        let cols: usize = parts.iter().map(|&p| self.value(p).cols()).sum();
        let mut value = Matrix::zeros(rows, cols);
        for r in 0..rows {
            let mut offset = 0;
            for &p in parts {
                let src = self.value(p).row(r);
                value.row_mut(r)[offset..offset + src.len()].copy_from_slice(src);
                offset += src.len();
            }
        }
        Ok(self.push(value, Some(Op::Concat(parts.to_vec()))))
    }

    /// Elementwise product. `b` may also be a `rows × 1` column broadcast
    /// across the columns of `a`.
    pub fn hadamard(&mut self, a: Tensor, b: Tensor) -> Result<Tensor, TensorError> {
        let kind = PrimitiveKind::Hadamard;
        self.check_owned(a, kind)?;
        self.check_owned(b, kind)?;
        let (rows, cols) = self.shape(a);
        let bshape = self.shape(b);
        let value = if bshape == (rows, cols) {
            let mut v = self.value(a).clone();
            for (x, y) in v.as_mut_slice().iter_mut().zip(self.value(b).as_slice()) {
                *x *= y;
            }
            v
        } else if bshape == (rows, 1) {
            let mut v = self.value(a).clone();
            for r in 0..rows {
                let s = self.value(b).get(r, 0);
                v.row_mut(r).iter_mut().for_each(|x| *x *= s);
            }
            v
        } else {
            return Err(self.mismatch(kind, a, b));
        };
        Ok(self.push(value, Some(Op::Hadamard(a, b))))
    }

    /// All-zero tensor shaped like `x` that blocks gradient flow into `x`.
    pub fn zero_mask(&mut self, x: Tensor) -> Result<Tensor, TensorError> {
        self.check_owned(x, PrimitiveKind::ZeroMask)?;
        let (r, c) = self.shape(x);
        Ok(self.push(Matrix::zeros(r, c), Some(Op::ZeroMask(x))))
    }

    /// Identity forward; backward multiplies the upstream gradient by `scale`.
    pub fn grad_scale(&mut self, x: Tensor, scale: f64) -> Result<Tensor, TensorError> {
        self.check_owned(x, PrimitiveKind::GradScale)?;
        check_scale(scale)?;
        let value = self.value(x).clone();
        Ok(self.push(value, Some(Op::GradScale { input: x, scale })))
    }

    /// Re-targets the factor of an existing grad-scale node. Used to set
    /// modulation after the forward statistics are known.
    pub fn set_grad_scale(&mut self, hook: Tensor, scale: f64) -> Result<(), TensorError> {
        check_scale(scale)?;
        match self.nodes.get_mut(hook.0).and_then(|n| n.op.as_mut()) {
            Some(Op::GradScale { scale: s, .. }) => {
                *s = scale;
                Ok(())
            }
            _ => Err(TensorError::NotAGradScale(hook.0)),
        }
    }

    pub fn grad_scale_factor(&self, hook: Tensor) -> Option<f64> {
        match self.nodes.get(hook.0).and_then(|n| n.op.as_ref()) {
            Some(Op::GradScale { scale, .. }) => Some(*scale),
            _ => None,
        }
    }

    /// `(‖upstream gradient‖, ‖propagated gradient‖)` seen by a grad-scale
    /// node during the most recent backward.
    pub fn hook_flow(&self, hook: Tensor) -> Option<(f64, f64)> {
        self.nodes.get(hook.0).and_then(|n| n.hook_flow)
    }

    /// Softmax over each row.
    pub fn row_softmax(&mut self, x: Tensor) -> Result<Tensor, TensorError> {
        self.check_owned(x, PrimitiveKind::RowSoftmax)?;
        let src = self.value(x);
        let mut value = Matrix::zeros(src.rows(), src.cols());
        for r in 0..src.rows() {
            value.row_mut(r).copy_from_slice(&softmax_row(src.row(r)));
        }
        Ok(self.push(value, Some(Op::RowSoftmax(x))))
    }

    /// Extracts column `k` as a `rows × 1` tensor.
    pub fn column(&mut self, x: Tensor, k: usize) -> Result<Tensor, TensorError> {
        self.check_owned(x, PrimitiveKind::Column)?;
        let src = self.value(x);
        if k >= src.cols() {
            return Err(TensorError::ShapeMismatch {
                op: PrimitiveKind::Column.name(),
                left: src.shape(),
                right: (1, k + 1),
            });
        }
        let value = Matrix::from_vec(src.rows(), 1, (0..src.rows()).map(|r| src.get(r, k)).collect());
        Ok(self.push(value, Some(Op::Column(x, k))))
    }

    /// Sum of all entries as a `1 × 1` tensor.
    pub fn sum(&mut self, x: Tensor) -> Result<Tensor, TensorError> {
        self.check_owned(x, PrimitiveKind::Sum)?;
        let value = Matrix::scalar(self.value(x).sum());
        Ok(self.push(value, Some(Op::Sum(x))))
    }

    pub fn scale(&mut self, x: Tensor, factor: f64) -> Result<Tensor, TensorError> {
        self.check_owned(x, PrimitiveKind::Scale)?;
        let value = self.value(x).scale(factor);
        Ok(self.push(value, Some(Op::Scale(x, factor))))
    }

    /// Mean over the batch of `−log softmax(logits_i)[label_i]`.
    pub fn softmax_cross_entropy(
        &mut self,
        logits: Tensor,
        labels: &[usize],
    ) -> Result<Tensor, TensorError> {
        if logits.0 >= self.nodes.len() {
            return Err(TensorError::ForeignTensor {
                op: "softmax_cross_entropy",
            });
        }
        let src = self.value(logits);
        let (batch, classes) = src.shape();
        if batch == 0 || labels.is_empty() {
            return Err(TensorError::EmptyBatch);
        }
        if labels.len() != batch {
            return Err(TensorError::LabelCount {
                rows: batch,
                labels: labels.len(),
            });
        }
        if let Some((index, &label)) = labels.iter().enumerate().find(|(_, &l)| l >= classes) {
            return Err(TensorError::LabelOutOfRange {
                index,
                label,
                classes,
            });
        }
        let mut probs = Matrix::zeros(batch, classes);
        let mut total = 0.0;
        for (r, &y) in labels.iter().enumerate() {
            let row = src.row(r);
            total += log_sum_exp(row) - row[y];
            probs.row_mut(r).copy_from_slice(&softmax_row(row));
        }
        let value = Matrix::scalar(total / batch as f64);
        Ok(self.push(
            value,
            Some(Op::SoftmaxCrossEntropy {
                logits,
                labels: labels.to_vec(),
                probs,
            }),
        ))
    }

    /// Activation pattern (`input > 0`) of every relu node, in graph order.
    pub fn relu_pattern(&self) -> Vec<bool> {
        let mut out = Vec::new();
        for n in &self.nodes {
            if let Some(Op::Relu(x)) = &n.op {
                out.extend(self.nodes[x.0].value.as_slice().iter().map(|&v| v > 0.0));
            }
        }
        out
    }

    /// Reverse sweep from a scalar `loss`.
    ///
    /// Intermediate gradients are reset first; leaf gradients accumulate
    /// across calls until [`Graph::zero_grad`].
    pub fn backward(&mut self, loss: Tensor) -> Result<(), TensorError> {
        if loss.0 >= self.nodes.len() {
            return Err(TensorError::ForeignTensor { op: "backward" });
        }
        let shape = self.shape(loss);
        if shape != (1, 1) {
            return Err(TensorError::NonScalarLoss(shape));
        }
        for n in &mut self.nodes {
            if n.op.is_some() {
                n.grad.fill(0.0);
            }
            n.hook_flow = None;
        }
        if self.nodes[loss.0].op.is_none() {
            self.nodes[loss.0].grad.as_mut_slice()[0] += 1.0;
            return Ok(());
        }
        self.nodes[loss.0].grad.as_mut_slice()[0] = 1.0;

        for i in (0..=loss.0).rev() {
            let (before, rest) = self.nodes.split_at_mut(i);
            let node = &mut rest[0];
            let Some(op) = &node.op else { continue };
            let g = &node.grad;
            if g.as_slice().iter().all(|&v| v == 0.0) {
                if let Op::GradScale { .. } = op {
                    node.hook_flow = Some((0.0, 0.0));
                }
                continue;
            }
            let mut flow = None;
            match op {
                Op::MatMul(a, b) => {
                    let da = g.matmul_transpose_rhs(&before[b.0].value);
                    let db = before[a.0].value.transpose_matmul(g);
                    before[a.0].grad.add_assign(&da);
                    before[b.0].grad.add_assign(&db);
                }
                Op::AddBias(x, bias) => {
                    before[x.0].grad.add_assign(g);
                    let bg = before[bias.0].grad.as_mut_slice();
                    for r in 0..g.rows() {
                        for (acc, v) in bg.iter_mut().zip(g.row(r)) {
                            *acc += v;
                        }
                    }
                }
                Op::Add(a, b) => {
                    before[a.0].grad.add_assign(g);
                    before[b.0].grad.add_assign(g);
                }
                Op::Relu(x) => {
                    let input = &before[x.0].value;
                    let contrib = Matrix::from_vec(
                        g.rows(),
                        g.cols(),
                        g.as_slice()
                            .iter()
                            .zip(input.as_slice())
                            .map(|(&gv, &xv)| if xv > 0.0 { gv } else { 0.0 })
                            .collect(),
                    );
                    before[x.0].grad.add_assign(&contrib);
                }
                Op::Sigmoid(x) => {
                    let y = &node.value;
                    let contrib = Matrix::from_vec(
                        g.rows(),
                        g.cols(),
                        g.as_slice()
                            .iter()
                            .zip(y.as_slice())
                            .map(|(&gv, &yv)| gv * yv * (1.0 - yv))
                            .collect(),
                    );
                    before[x.0].grad.add_assign(&contrib);
                }
                Op::Concat(parts) => {
                    let mut offset = 0;
                    for p in parts {
                        let cols = before[p.0].value.cols();
                        let pg = &mut before[p.0].grad;
                        for r in 0..g.rows() {
                            for (acc, v) in pg.row_mut(r).iter_mut().zip(&g.row(r)[offset..offset + cols]) {
                                *acc += v;
                            }
                        }
                        offset += cols;
                    }
                }
                Op::Hadamard(a, b) => {
                    let av = &before[a.0].value;
                    let bv = &before[b.0].value;
                    let (rows, cols) = av.shape();
                    let mut da = Matrix::zeros(rows, cols);
                    let mut db = Matrix::zeros(bv.rows(), bv.cols());
                    if bv.shape() == av.shape() {
                        for idx in 0..rows * cols {
                            let gv = g.as_slice()[idx];
                            da.as_mut_slice()[idx] = gv * bv.as_slice()[idx];
                            db.as_mut_slice()[idx] = gv * av.as_slice()[idx];
                        }
                    } else {
                        for r in 0..rows {
                            let s = bv.get(r, 0);
                            let mut acc = 0.0;
                            for c in 0..cols {
                                let gv = g.get(r, c);
                                da.set(r, c, gv * s);
                                acc += gv * av.get(r, c);
                            }
                            db.set(r, 0, acc);
                        }
                    }
                    before[a.0].grad.add_assign(&da);
                    before[b.0].grad.add_assign(&db);
                }
                Op::ZeroMask(_) => {}
                Op::GradScale { input, scale } => {
                    let scaled = g.scale(*scale);
                    flow = Some((g.norm(), scaled.norm()));
                    before[input.0].grad.add_assign(&scaled);
                }
                Op::RowSoftmax(x) => {
                    let y = &node.value;
                    let mut contrib = Matrix::zeros(g.rows(), g.cols());
                    for r in 0..g.rows() {
                        let gy: f64 = g.row(r).iter().zip(y.row(r)).map(|(a, b)| a * b).sum();
                        for c in 0..g.cols() {
                            contrib.set(r, c, y.get(r, c) * (g.get(r, c) - gy));
                        }
                    }
                    before[x.0].grad.add_assign(&contrib);
                }
                Op::Column(x, k) => {
                    let xg = &mut before[x.0].grad;
                    for r in 0..g.rows() {
                        let v = xg.get(r, *k) + g.get(r, 0);
                        xg.set(r, *k, v);
                    }
                }
                Op::Sum(x) => {
                    let s = g.as_slice()[0];
                    before[x.0].grad.as_mut_slice().iter_mut().for_each(|v| *v += s);
                }
                Op::Scale(x, factor) => {
                    before[x.0].grad.add_assign(&g.scale(*factor));
                }
                Op::SoftmaxCrossEntropy {
                    logits,
                    labels,
                    probs,
                } => {
                    let upstream = g.as_slice()[0] / labels.len() as f64;
                    let mut contrib = probs.clone();
                    for (r, &y) in labels.iter().enumerate() {
                        let v = contrib.get(r, y) - 1.0;
                        contrib.set(r, y, v);
                    }
                    before[logits.0].grad.add_assign(&contrib.scale(upstream));
                }
            }
            if flow.is_some() {
                node.hook_flow = flow;
            }
        }
        Ok(())
    }
}

fn check_scale(scale: f64) -> Result<(), TensorError> {
    if scale.is_finite() && scale >= 0.0 {
        Ok(())
    } else {
        Err(TensorError::InvalidScale(scale))
    }
}
