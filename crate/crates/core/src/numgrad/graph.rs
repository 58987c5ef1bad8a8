use std::collections::BTreeMap;

use super::{DenseArray, NumgradError, ParamStore};

/// Index of a node inside a [`Graph`].
pub type NodeId = usize;

/// Primitive operations understood by the graph.
///
/// Matrices are `[rows, cols]`; per-sample vectors are `[rows]`; the two
/// loss ops reduce to a scalar mean over rows.
#[derive(Debug, Clone)]
pub enum Op {
    /// Fed at forward time. `None` dimensions accept any positive size.
    Input {
        name: String,
        dims: Vec<Option<usize>>,
    },
    Param {
        name: String,
    },
    /// `[m, k] x [k, n] -> [m, n]`
    MatMul(NodeId, NodeId),
    /// `[m, k] x [n, k]^T -> [m, n]`
    MatMulT(NodeId, NodeId),
    /// `[m, n] + [n]`, the only broadcast supported.
    AddBias(NodeId, NodeId),
    Relu(NodeId),
    /// Row-wise dot product `[m, n], [m, n] -> [m]`.
    RowDot(NodeId, NodeId),
    /// Mean softmax cross-entropy of `[m, c]` logits against `[m]` class indices.
    SoftmaxXent {
        logits: NodeId,
        labels: NodeId,
    },
    /// Mean binary cross-entropy of `[m]` logits against `[m]` targets in `[0, 1]`.
    SigmoidBce {
        logits: NodeId,
        targets: NodeId,
    },
    Scale(NodeId, f64),
    Add(NodeId, NodeId),
}

impl Op {
    pub fn kind(&self) -> &'static str {
        match self {
            Op::Input { .. } => "input",
            Op::Param { .. } => "param",
            Op::MatMul(..) => "matmul",
            Op::MatMulT(..) => "matmul_t",
            Op::AddBias(..) => "add_bias",
            Op::Relu(_) => "relu",
            Op::RowDot(..) => "dot",
            Op::SoftmaxXent { .. } => "softmax_xent",
            Op::SigmoidBce { .. } => "sigmoid_bce",
            Op::Scale(..) => "scale",
            Op::Add(..) => "add",
        }
    }

    fn operands(&self) -> Vec<NodeId> {
        match *self {
            Op::Input { .. } | Op::Param { .. } => vec![],
            Op::Relu(x) | Op::Scale(x, _) => vec![x],
            Op::MatMul(a, b)
            | Op::MatMulT(a, b)
            | Op::AddBias(a, b)
            | Op::RowDot(a, b)
            | Op::Add(a, b) => vec![a, b],
            Op::SoftmaxXent { logits, labels } => vec![logits, labels],
            Op::SigmoidBce { logits, targets } => vec![logits, targets],
        }
    }
}

#[derive(Debug, Clone)]
struct Node {
    op: Op,
    label: Option<String>,
}

/// A static computation graph with its own parameters.
///
/// Nodes are appended in topological order: every operand of a node has a
/// smaller id. `forward` evaluates all nodes and caches their values;
/// `backward` walks the cache in exact reverse order.
#[derive(Debug, Clone, Default)]
pub struct Graph {
    nodes: Vec<Node>,
    params: ParamStore,
    param_nodes: BTreeMap<String, NodeId>,
    outputs: BTreeMap<String, NodeId>,
    cache: Option<Vec<DenseArray>>,
}

impl Graph {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with_params(params: ParamStore) -> Self {
        Self {
            params,
            ..Self::default()
        }
    }

    pub fn params(&self) -> &ParamStore {
        &self.params
    }

    /// Mutable access to parameters. Invalidates cached activations.
    pub fn params_mut(&mut self) -> &mut ParamStore {
        self.cache = None;
        &mut self.params
    }

    pub fn into_params(self) -> ParamStore {
        self.params
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn op(&self, id: NodeId) -> &Op {
        &self.nodes[id].op
    }

    pub fn output_names(&self) -> impl Iterator<Item = &str> {
        self.outputs.keys().map(String::as_str)
    }

    fn push(&mut self, op: Op) -> NodeId {
        for operand in op.operands() {
            assert!(
                operand < self.nodes.len(),
                "operand {operand} does not precede node {}",
                self.nodes.len()
            );
        }
        self.cache = None;
        self.nodes.push(Node { op, label: None });
        self.nodes.len() - 1
    }

    pub fn input(&mut self, name: &str, dims: &[Option<usize>]) -> NodeId {
        self.push(Op::Input {
            name: name.to_string(),
            dims: dims.to_vec(),
        })
    }

    /// Node reading the named parameter; repeated calls share one node.
    pub fn param(&mut self, name: &str) -> Result<NodeId, NumgradError> {
        if let Some(&id) = self.param_nodes.get(name) {
            return Ok(id);
        }
        if self.params.get(name).is_none() {
            return Err(NumgradError::UnknownParam(name.to_string()));
        }
        let id = self.push(Op::Param {
            name: name.to_string(),
        });
        self.param_nodes.insert(name.to_string(), id);
        Ok(id)
    }

    pub fn matmul(&mut self, a: NodeId, b: NodeId) -> NodeId {
        self.push(Op::MatMul(a, b))
    }

    pub fn matmul_t(&mut self, a: NodeId, b: NodeId) -> NodeId {
        self.push(Op::MatMulT(a, b))
    }

    pub fn add_bias(&mut self, x: NodeId, bias: NodeId) -> NodeId {
        self.push(Op::AddBias(x, bias))
    }

    pub fn relu(&mut self, x: NodeId) -> NodeId {
        self.push(Op::Relu(x))
    }

    pub fn row_dot(&mut self, a: NodeId, b: NodeId) -> NodeId {
        self.push(Op::RowDot(a, b))
    }

    pub fn softmax_xent(&mut self, logits: NodeId, labels: NodeId) -> NodeId {
        self.push(Op::SoftmaxXent { logits, labels })
    }

    pub fn sigmoid_bce(&mut self, logits: NodeId, targets: NodeId) -> NodeId {
        self.push(Op::SigmoidBce { logits, targets })
    }

    pub fn scale(&mut self, x: NodeId, factor: f64) -> NodeId {
        self.push(Op::Scale(x, factor))
    }

    pub fn add(&mut self, a: NodeId, b: NodeId) -> NodeId {
        self.push(Op::Add(a, b))
    }

    /// Exposes `node` under `name` in the forward outputs.
    pub fn name(&mut self, node: NodeId, name: &str) {
        self.nodes[node].label = Some(name.to_string());
        self.outputs.insert(name.to_string(), node);
    }

    pub fn node_by_name(&self, name: &str) -> Option<NodeId> {
        self.outputs.get(name).copied()
    }

    fn describe(&self, id: NodeId) -> String {
        let node = &self.nodes[id];
        match &node.label {
            Some(label) => format!("node {id} '{label}' ({})", node.op.kind()),
            None => format!("node {id} ({})", node.op.kind()),
        }
    }

    fn mismatch(&self, id: NodeId, detail: String) -> NumgradError {
        NumgradError::ShapeMismatch {
            node: self.describe(id),
            detail,
        }
    }

    /// Evaluates every node and returns the named outputs.
    pub fn forward(
        &mut self,
        inputs: &BTreeMap<String, DenseArray>,
    ) -> Result<BTreeMap<String, DenseArray>, NumgradError> {
        self.cache = None;
        let mut values: Vec<DenseArray> = Vec::with_capacity(self.nodes.len());
        for id in 0..self.nodes.len() {
            let value = self.eval_node(id, &values, inputs)?;
            if !value.all_finite() {
                return Err(NumgradError::NonFinite {
                    node: self.describe(id),
                });
            }
            values.push(value);
        }
        let outputs = self
            .outputs
            .iter()
            .map(|(name, &id)| (name.clone(), values[id].clone()))
            .collect();
        self.cache = Some(values);
        Ok(outputs)
    }

    /// Cached value of a node from the last forward pass.
    pub fn value(&self, id: NodeId) -> Option<&DenseArray> {
        self.cache.as_ref().map(|c| &c[id])
    }

    fn eval_node(
        &self,
        id: NodeId,
        values: &[DenseArray],
        inputs: &BTreeMap<String, DenseArray>,
    ) -> Result<DenseArray, NumgradError> {
        let out = match &self.nodes[id].op {
            Op::Input { name, dims } => {
                let value = inputs
                    .get(name)
                    .ok_or_else(|| NumgradError::MissingInput(name.clone()))?;
                let shape = value.shape();
                let ok = shape.len() == dims.len()
                    && shape
                        .iter()
                        .zip(dims)
                        .all(|(s, d)| d.is_none_or(|d| d == *s));
                if !ok {
                    return Err(self.mismatch(
                        id,
                        format!("input '{name}' has shape {shape:?}, declared {dims:?}"),
                    ));
                }
                value.clone()
            }
            Op::Param { name } => self
                .params
                .get(name)
                .ok_or_else(|| NumgradError::UnknownParam(name.clone()))?
                .clone(),
            Op::MatMul(a, b) => {
                let (a, b) = (&values[*a], &values[*b]);
                match (a.dims2(), b.dims2()) {
                    (Some((m, k)), Some((k2, n))) if k == k2 => matmul(a.data(), b.data(), m, k, n),
                    _ => {
                        return Err(self.mismatch(
                            id,
                            format!("cannot multiply {:?} by {:?}", a.shape(), b.shape()),
                        ))
                    }
                }
            }
            Op::MatMulT(a, b) => {
                let (a, b) = (&values[*a], &values[*b]);
                match (a.dims2(), b.dims2()) {
                    (Some((m, k)), Some((n, k2))) if k == k2 => {
                        matmul_t(a.data(), b.data(), m, k, n)
                    }
                    _ => {
                        return Err(self.mismatch(
                            id,
                            format!("cannot multiply {:?} by {:?}^T", a.shape(), b.shape()),
                        ))
                    }
                }
            }
            Op::AddBias(x, bias) => {
                let (x, bias) = (&values[*x], &values[*bias]);
                match x.dims2() {
                    Some((_, n)) if bias.shape() == [n] => {
                        let mut out = x.clone();
                        for row in out.data_mut().chunks_mut(n) {
                            for (v, b) in row.iter_mut().zip(bias.data()) {
                                *v += b;
                            }
                        }
                        out
                    }
                    _ => {
                        return Err(self.mismatch(
                            id,
                            format!("bias {:?} does not fit {:?}", bias.shape(), x.shape()),
                        ))
                    }
                }
            }
            Op::Relu(x) => {
                let x = &values[*x];
                let data = x.data().iter().map(|&v| v.max(0.0)).collect();
                DenseArray::from_parts_unchecked(x.shape().to_vec(), data)
            }
            Op::RowDot(a, b) => {
                let (a, b) = (&values[*a], &values[*b]);
                match a.dims2() {
                    Some((m, n)) if a.shape() == b.shape() => {
                        let data = (0..m)
                            .map(|i| {
                                dot(&a.data()[i * n..(i + 1) * n], &b.data()[i * n..(i + 1) * n])
                            })
                            .collect();
                        DenseArray::from_parts_unchecked(vec![m], data)
                    }
                    _ => {
                        return Err(self
                            .mismatch(id, format!("dot of {:?} and {:?}", a.shape(), b.shape())))
                    }
                }
            }
            Op::SoftmaxXent { logits, labels } => {
                let (logits, labels) = (&values[*logits], &values[*labels]);
                let (m, c) = self.check_xent(id, logits, labels)?;
                let mut total = 0.0;
                for i in 0..m {
                    let row = &logits.data()[i * c..(i + 1) * c];
                    let class = labels.data()[i] as usize;
                    total += log_sum_exp(row) - row[class];
                }
                DenseArray::scalar(total / m as f64)
            }
            Op::SigmoidBce { logits, targets } => {
                let (logits, targets) = (&values[*logits], &values[*targets]);
                self.check_bce(id, logits, targets)?;
                let m = logits.len();
                let total: f64 = logits
                    .data()
                    .iter()
                    .zip(targets.data())
                    .map(|(&d, &t)| bce_with_logit(d, t))
                    .sum();
                DenseArray::scalar(total / m as f64)
            }
            Op::Scale(x, factor) => {
                let x = &values[*x];
                let data = x.data().iter().map(|v| v * factor).collect();
                DenseArray::from_parts_unchecked(x.shape().to_vec(), data)
            }
            Op::Add(a, b) => {
                let (a, b) = (&values[*a], &values[*b]);
                if a.shape() != b.shape() {
                    return Err(
                        self.mismatch(id, format!("add of {:?} and {:?}", a.shape(), b.shape()))
                    );
                }
                let data = a.data().iter().zip(b.data()).map(|(x, y)| x + y).collect();
                DenseArray::from_parts_unchecked(a.shape().to_vec(), data)
            }
        };
        Ok(out)
    }

    fn check_xent(
        &self,
        id: NodeId,
        logits: &DenseArray,
        labels: &DenseArray,
    ) -> Result<(usize, usize), NumgradError> {
        let Some((m, c)) = logits.dims2() else {
            return Err(self.mismatch(id, format!("logits {:?} are not a matrix", logits.shape())));
        };
        if labels.shape() != [m] {
            return Err(self.mismatch(
                id,
                format!(
                    "labels {:?} do not match logits {:?}",
                    labels.shape(),
                    logits.shape()
                ),
            ));
        }
        for &y in labels.data() {
            if y.fract() != 0.0 || y < 0.0 || y >= c as f64 {
                return Err(NumgradError::BadLabel {
                    node: self.describe(id),
                    value: y,
                    classes: c,
                });
            }
        }
        Ok((m, c))
    }

    fn check_bce(
        &self,
        id: NodeId,
        logits: &DenseArray,
        targets: &DenseArray,
    ) -> Result<(), NumgradError> {
        if logits.shape().len() != 1 || logits.shape() != targets.shape() {
            return Err(self.mismatch(
                id,
                format!(
                    "logits {:?} vs targets {:?}",
                    logits.shape(),
                    targets.shape()
                ),
            ));
        }
        if let Some(&t) = targets.data().iter().find(|t| !(0.0..=1.0).contains(*t)) {
            return Err(self.mismatch(id, format!("target {t} outside [0, 1]")));
        }
        Ok(())
    }

    /// Gradients of the scalar `loss` output with respect to every parameter.
    ///
    /// Parameters with no path to the loss receive all-zero gradients.
    pub fn backward(&self, loss: &str) -> Result<ParamStore, NumgradError> {
        let loss_id = self
            .node_by_name(loss)
            .ok_or_else(|| NumgradError::MissingOutput(loss.to_string()))?;
        self.backward_from(loss_id)
    }

    pub fn backward_from(&self, loss_id: NodeId) -> Result<ParamStore, NumgradError> {
        let values = self.cache.as_ref().ok_or(NumgradError::NoForward)?;
        if !values[loss_id].is_scalar() {
            return Err(NumgradError::NotScalar(values[loss_id].shape().to_vec()));
        }

        let mut grads: Vec<Option<DenseArray>> = vec![None; self.nodes.len()];
        grads[loss_id] = Some(DenseArray::from_parts_unchecked(
            values[loss_id].shape().to_vec(),
            vec![1.0],
        ));

        for id in (0..=loss_id).rev() {
            let Some(g) = grads[id].take() else { continue };
            match &self.nodes[id].op {
                Op::Input { .. } => {}
                Op::Param { .. } => {
                    grads[id] = Some(g);
                }
                Op::MatMul(a, b) => {
                    let (av, bv) = (&values[*a], &values[*b]);
                    let (m, k) = av.dims2().expect("checked in forward");
                    let n = bv.shape()[1];
                    // dA = G B^T, dB = A^T G
                    let da = matmul_t(g.data(), bv.data(), m, n, k);
                    let db = matmul_tn(av.data(), g.data(), m, k, n);
                    accumulate(&mut grads, *a, da);
                    accumulate(&mut grads, *b, db);
                }
                Op::MatMulT(a, b) => {
                    let (av, bv) = (&values[*a], &values[*b]);
                    let (m, k) = av.dims2().expect("checked in forward");
                    let n = bv.shape()[0];
                    // out = A B^T: dA = G B, dB = G^T A
                    let da = matmul(g.data(), bv.data(), m, n, k);
                    let db = matmul_tn(g.data(), av.data(), m, n, k);
                    accumulate(&mut grads, *a, da);
                    accumulate(&mut grads, *b, db);
                }
                Op::AddBias(x, bias) => {
                    let n = values[*bias].len();
                    let mut db = vec![0.0; n];
                    for row in g.data().chunks(n) {
                        for (acc, v) in db.iter_mut().zip(row) {
                            *acc += v;
                        }
                    }
                    accumulate(
                        &mut grads,
                        *bias,
                        DenseArray::from_parts_unchecked(vec![n], db),
                    );
                    accumulate(&mut grads, *x, g);
                }
                Op::Relu(x) => {
                    let xv = &values[*x];
                    let data = g
                        .data()
                        .iter()
                        .zip(xv.data())
                        .map(|(&gi, &xi)| if xi > 0.0 { gi } else { 0.0 })
                        .collect();
                    accumulate(
                        &mut grads,
                        *x,
                        DenseArray::from_parts_unchecked(xv.shape().to_vec(), data),
                    );
                }
                Op::RowDot(a, b) => {
                    let (av, bv) = (&values[*a], &values[*b]);
                    let (m, n) = av.dims2().expect("checked in forward");
                    let mut da = vec![0.0; m * n];
                    let mut db = vec![0.0; m * n];
                    for i in 0..m {
                        let gi = g.data()[i];
                        for j in 0..n {
                            da[i * n + j] = gi * bv.data()[i * n + j];
                            db[i * n + j] = gi * av.data()[i * n + j];
                        }
                    }
                    accumulate(
                        &mut grads,
                        *a,
                        DenseArray::from_parts_unchecked(vec![m, n], da),
                    );
                    accumulate(
                        &mut grads,
                        *b,
                        DenseArray::from_parts_unchecked(vec![m, n], db),
                    );
                }
                Op::SoftmaxXent { logits, labels } => {
                    let (lv, yv) = (&values[*logits], &values[*labels]);
                    let (m, c) = lv.dims2().expect("checked in forward");
                    let scale = g.data()[0] / m as f64;
                    let mut dl = vec![0.0; m * c];
                    for i in 0..m {
                        let row = &lv.data()[i * c..(i + 1) * c];
                        let lse = log_sum_exp(row);
                        let class = yv.data()[i] as usize;
                        for j in 0..c {
                            let p = (row[j] - lse).exp();
                            let target = if j == class { 1.0 } else { 0.0 };
                            dl[i * c + j] = scale * (p - target);
                        }
                    }
                    accumulate(
                        &mut grads,
                        *logits,
                        DenseArray::from_parts_unchecked(vec![m, c], dl),
                    );
                }
                Op::SigmoidBce { logits, targets } => {
                    let (dv, tv) = (&values[*logits], &values[*targets]);
                    let m = dv.len();
                    let scale = g.data()[0] / m as f64;
                    let data = dv
                        .data()
                        .iter()
                        .zip(tv.data())
                        .map(|(&d, &t)| scale * (sigmoid(d) - t))
                        .collect();
                    accumulate(
                        &mut grads,
                        *logits,
                        DenseArray::from_parts_unchecked(vec![m], data),
                    );
                }
                Op::Scale(x, factor) => {
                    let data = g.data().iter().map(|v| v * factor).collect();
                    accumulate(
                        &mut grads,
                        *x,
                        DenseArray::from_parts_unchecked(g.shape().to_vec(), data),
                    );
                }
                Op::Add(a, b) => {
                    accumulate(&mut grads, *a, g.clone());
                    accumulate(&mut grads, *b, g);
                }
            }
        }

        let mut out = ParamStore::new();
        for (name, value) in self.params.iter() {
            let grad = self
                .param_nodes
                .get(name)
                .and_then(|&id| grads[id].take())
                .unwrap_or_else(|| DenseArray::zeros(value.shape()));
            out.insert(name, grad);
        }
        Ok(out)
    }
}

fn accumulate(grads: &mut [Option<DenseArray>], id: NodeId, g: DenseArray) {
    match &mut grads[id] {
        Some(existing) => {
            for (e, v) in existing.data_mut().iter_mut().zip(g.data()) {
                *e += v;
            }
        }
        slot @ None => *slot = Some(g),
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// `[m, k] x [k, n]`
fn matmul(a: &[f64], b: &[f64], m: usize, k: usize, n: usize) -> DenseArray {
    let mut out = vec![0.0; m * n];
    for i in 0..m {
        let out_row = &mut out[i * n..(i + 1) * n];
        for p in 0..k {
            let aip = a[i * k + p];
            if aip == 0.0 {
                continue;
            }
            let b_row = &b[p * n..(p + 1) * n];
            for (o, bv) in out_row.iter_mut().zip(b_row) {
                *o += aip * bv;
            }
        }
    }
    DenseArray::from_parts_unchecked(vec![m, n], out)
}

/// `[m, k] x [n, k]^T`
fn matmul_t(a: &[f64], b: &[f64], m: usize, k: usize, n: usize) -> DenseArray {
    let mut out = vec![0.0; m * n];
    for i in 0..m {
        let a_row = &a[i * k..(i + 1) * k];
        for j in 0..n {
            out[i * n + j] = dot(a_row, &b[j * k..(j + 1) * k]);
        }
    }
    DenseArray::from_parts_unchecked(vec![m, n], out)
}

/// `[m, k]^T x [m, n] -> [k, n]`
fn matmul_tn(a: &[f64], b: &[f64], m: usize, k: usize, n: usize) -> DenseArray {
    let mut out = vec![0.0; k * n];
    for i in 0..m {
        let b_row = &b[i * n..(i + 1) * n];
        for p in 0..k {
            let aip = a[i * k + p];
            if aip == 0.0 {
                continue;
            }
            let out_row = &mut out[p * n..(p + 1) * n];
            for (o, bv) in out_row.iter_mut().zip(b_row) {
                *o += aip * bv;
            }
        }
    }
    DenseArray::from_parts_unchecked(vec![k, n], out)
}

/// `log(sum(exp(row)))` with max subtraction.
pub fn log_sum_exp(row: &[f64]) -> f64 {
    let max = row.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let sum: f64 = row.iter().map(|v| (v - max).exp()).sum();
    max + sum.ln()
}

/// Row-wise softmax of a `[m, c]` matrix.
pub fn softmax_rows(logits: &DenseArray) -> Option<DenseArray> {
    let (m, c) = logits.dims2()?;
    let mut data = Vec::with_capacity(m * c);
    for i in 0..m {
        let row = &logits.data()[i * c..(i + 1) * c];
        let lse = log_sum_exp(row);
        data.extend(row.iter().map(|v| (v - lse).exp()));
    }
    Some(DenseArray::from_parts_unchecked(vec![m, c], data))
}

pub fn sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

/// `-[t log s(d) + (1 - t) log(1 - s(d))]` in the form
/// `max(d, 0) - d t + log(1 + exp(-|d|))`.
pub fn bce_with_logit(d: f64, t: f64) -> f64 {
    d.max(0.0) - d * t + (-d.abs()).exp().ln_1p()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn feed(pairs: &[(&str, DenseArray)]) -> BTreeMap<String, DenseArray> {
        pairs
            .iter()
            .map(|(k, v)| (k.to_string(), v.clone()))
            .collect()
    }

    #[test]
    fn identity_graph_returns_input() {
        let mut g = Graph::new();
        let x = g.input("x", &[None]);
        g.name(x, "y");
        let xv = DenseArray::from_vec(vec![1.0, -2.0, 3.5]);
        let out = g.forward(&feed(&[("x", xv.clone())])).unwrap();
        assert_eq!(out["y"], xv);
    }

    #[test]
    fn identity_matrix_times_vector() {
        let mut params = ParamStore::new();
        params.insert("eye", DenseArray::identity(3));
        let mut g = Graph::with_params(params);
        let eye = g.param("eye").unwrap();
        let v = g.input("v", &[Some(3), Some(1)]);
        let out = g.matmul(eye, v);
        g.name(out, "out");
        let vv = DenseArray::new(vec![3, 1], vec![0.25, -7.0, 3.0]).unwrap();
        let res = g.forward(&feed(&[("v", vv.clone())])).unwrap();
        assert_eq!(res["out"], vv);
    }

    #[test]
    fn relu_clamps_negatives() {
        let mut g = Graph::new();
        let x = g.input("x", &[None]);
        let r = g.relu(x);
        g.name(r, "r");
        let out = g
            .forward(&feed(&[("x", DenseArray::from_vec(vec![-1.0, 0.0, 2.0]))]))
            .unwrap();
        assert_eq!(out["r"].data(), &[0.0, 0.0, 2.0]);
    }

    #[test]
    fn shape_error_names_the_node() {
        let mut params = ParamStore::new();
        params.insert("w", DenseArray::zeros(&[2, 3]));
        let mut g = Graph::with_params(params);
        let x = g.input("x", &[None, None]);
        let w = g.param("w").unwrap();
        let y = g.matmul(x, w);
        g.name(y, "proj");
        let err = g
            .forward(&feed(&[("x", DenseArray::zeros(&[4, 5]))]))
            .unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("'proj'"), "{msg}");
        assert!(msg.contains("matmul"), "{msg}");
    }

    #[test]
    fn declared_input_dims_are_enforced() {
        let mut g = Graph::new();
        let x = g.input("x", &[None, Some(4)]);
        g.name(x, "x");
        assert!(g
            .forward(&feed(&[("x", DenseArray::zeros(&[2, 3]))]))
            .is_err());
        assert!(g
            .forward(&feed(&[("x", DenseArray::zeros(&[7, 4]))]))
            .is_ok());
        assert!(matches!(
            g.forward(&BTreeMap::new()),
            Err(NumgradError::MissingInput(_))
        ));
    }

    #[test]
    fn linear_gradient() {
        let mut params = ParamStore::new();
        params.insert("w", DenseArray::new(vec![1, 2], vec![0.3, -0.4]).unwrap());
        let mut g = Graph::with_params(params);
        let w = g.param("w").unwrap();
        let x = g.input("x", &[Some(1), Some(2)]);
        let l = g.row_dot(w, x);
        g.name(l, "loss");
        let xv = DenseArray::new(vec![1, 2], vec![1.0, 2.0]).unwrap();
        g.forward(&feed(&[("x", xv)])).unwrap();
        let grads = g.backward("loss").unwrap();
        assert_eq!(grads.get("w").unwrap().data(), &[1.0, 2.0]);
    }

    #[test]
    fn disconnected_param_gets_zero_gradient() {
        let mut params = ParamStore::new();
        params.insert("w", DenseArray::from_vec(vec![1.0, 2.0]));
        params.insert("unused", DenseArray::from_vec(vec![5.0, 6.0, 7.0]));
        let mut g = Graph::with_params(params);
        let w = g.param("w").unwrap();
        let _u = g.param("unused").unwrap();
        let s = g.scale(w, 3.0);
        let x = g.input("x", &[Some(1), Some(2)]);
        let _ = s;
        let l = g.row_dot(x, x);
        g.name(l, "loss");
        g.forward(&feed(&[(
            "x",
            DenseArray::new(vec![1, 2], vec![1.0, 1.0]).unwrap(),
        )]))
        .unwrap();
        let grads = g.backward("loss").unwrap();
        assert_eq!(grads.get("unused").unwrap().data(), &[0.0; 3]);
        assert_eq!(grads.get("w").unwrap().data(), &[0.0; 2]);
    }

    #[test]
    fn non_scalar_loss_is_rejected() {
        let mut g = Graph::new();
        let x = g.input("x", &[None]);
        g.name(x, "x");
        g.forward(&feed(&[("x", DenseArray::from_vec(vec![1.0, 2.0]))]))
            .unwrap();
        assert!(matches!(g.backward("x"), Err(NumgradError::NotScalar(_))));
    }

    #[test]
    fn backward_requires_forward() {
        let mut g = Graph::new();
        let x = g.input("x", &[]);
        g.name(x, "x");
        assert!(matches!(g.backward("x"), Err(NumgradError::NoForward)));
    }

    #[test]
    fn out_of_range_label_is_an_error() {
        let mut g = Graph::new();
        let z = g.input("z", &[None, Some(3)]);
        let y = g.input("y", &[None]);
        let l = g.softmax_xent(z, y);
        g.name(l, "loss");
        let err = g
            .forward(&feed(&[
                ("z", DenseArray::zeros(&[1, 3])),
                ("y", DenseArray::from_vec(vec![3.0])),
            ]))
            .unwrap_err();
        assert!(matches!(err, NumgradError::BadLabel { .. }));
    }

    #[test]
    fn bce_is_stable_for_huge_logits() {
        assert!(bce_with_logit(1e4, 1.0).abs() < 1e-300);
        assert!((bce_with_logit(1e4, 0.0) - 1e4).abs() < 1e-9);
        assert!((bce_with_logit(-1e4, 1.0) - 1e4).abs() < 1e-9);
        assert!((bce_with_logit(0.0, 0.3) - std::f64::consts::LN_2).abs() < 1e-15);
        assert!(sigmoid(-1e4) >= 0.0 && sigmoid(1e4) <= 1.0);
    }

    #[test]
    fn log_sum_exp_survives_large_values() {
        let v = log_sum_exp(&[1000.0, 1000.0]);
        assert!((v - (1000.0 + std::f64::consts::LN_2)).abs() < 1e-12);
    }
}
