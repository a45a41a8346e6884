//! Define-by-run reverse-mode tape.
//!
//! Every operation appends a node holding its forward value and enough
//! context to replay the chain rule. Nodes only reference earlier nodes, so
//! the tape is always in topological order and backward is a single reverse
//! sweep.

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::tensor::{axis_split, Tensor};
use crate::error::{Error, Result};

/// Handle to a node on a [`Tape`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Var(usize);

impl Var {
    pub fn index(self) -> usize {
        self.0
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Activation {
    Tanh,
    Sigmoid,
    Identity,
}

impl Activation {
    pub fn apply(self, x: f64) -> f64 {
        match self {
            Activation::Tanh => x.tanh(),
            Activation::Sigmoid => sigmoid(x),
            Activation::Identity => x,
        }
    }

    /// Derivative expressed through the activation's output `y`.
    fn derivative_from_output(self, y: f64) -> f64 {
        match self {
            Activation::Tanh => 1.0 - y * y,
            Activation::Sigmoid => y * (1.0 - y),
            Activation::Identity => 1.0,
        }
    }
}

fn sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Elementwise {
    Add,
    Sub,
    Hadamard,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum DropoutMode {
    Train,
    Eval,
}

#[derive(Debug)]
enum Op {
    Leaf,
    MatMul(Var, Var),
    Elementwise(Elementwise, Var, Var),
    AddBias(Var, Var),
    Scale(Var, f64),
    Activation(Activation, Var),
    Concat { inputs: Vec<Var>, axis: usize },
    Narrow { input: Var, axis: usize, start: usize },
    Transpose(Var),
    Gather { table: Var, ids: Vec<usize> },
    Softmax { input: Var, axis: usize },
    Dropout { input: Var, mask: Vec<f64> },
    MaxPool { input: Var, argmax: Vec<usize> },
    CrossEntropy { logits: Var, targets: Vec<usize> },
    Sum(Var),
}

#[derive(Debug)]
struct Node {
    shape: Vec<usize>,
    value: Vec<f64>,
    requires_grad: bool,
    op: Op,
}

/// Computation tape. Rebuilt for every forward pass.
#[derive(Debug, Default)]
pub struct Tape {
    nodes: Vec<Node>,
}

/// Leaf gradients produced by [`Tape::backward`].
#[derive(Debug)]
pub struct Gradients {
    grads: Vec<Option<Vec<f64>>>,
}

impl Gradients {
    pub fn get(&self, var: Var) -> Option<&[f64]> {
        self.grads.get(var.0).and_then(|g| g.as_deref())
    }

    /// Adds the gradient of `var` into `target.grad`. A leaf that the loss
    /// does not depend on contributes zeros.
    pub fn accumulate_into(&self, var: Var, target: &mut Tensor) {
        match self.get(var) {
            Some(g) => target.accumulate_grad(g),
            None => {
                if target.grad.is_none() {
                    target.zero_grad();
                }
            }
        }
    }
}

impl Tape {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn value(&self, v: Var) -> &[f64] {
        &self.nodes[v.0].value
    }

    pub fn shape(&self, v: Var) -> &[usize] {
        &self.nodes[v.0].shape
    }

    pub fn tensor(&self, v: Var) -> Tensor {
        let n = &self.nodes[v.0];
        Tensor::new(n.shape.clone(), n.value.clone()).expect("tape nodes hold valid tensors")
    }

    pub fn scalar_value(&self, v: Var) -> f64 {
        self.nodes[v.0].value[0]
    }

    fn push(&mut self, shape: Vec<usize>, value: Vec<f64>, requires_grad: bool, op: Op) -> Var {
        debug_assert_eq!(shape.iter().product::<usize>(), value.len());
        self.nodes.push(Node {
            shape,
            value,
            requires_grad,
            op,
        });
        Var(self.nodes.len() - 1)
    }

    fn needs(&self, v: Var) -> bool {
        self.nodes[v.0].requires_grad
    }

    /// Records a leaf; it is differentiable iff `t.requires_grad`.
    pub fn leaf(&mut self, t: &Tensor) -> Var {
        self.push(t.shape().to_vec(), t.values().to_vec(), t.requires_grad, Op::Leaf)
    }

    /// Records a differentiable leaf regardless of the tensor's flag.
    pub fn param(&mut self, t: &Tensor) -> Var {
        self.push(t.shape().to_vec(), t.values().to_vec(), true, Op::Leaf)
    }

    pub fn constant(&mut self, t: Tensor) -> Var {
        let shape = t.shape().to_vec();
        self.push(shape, t.into_values(), false, Op::Leaf)
    }

    pub fn matmul(&mut self, a: Var, b: Var) -> Result<Var> {
        let (sa, sb) = (self.shape(a), self.shape(b));
        if sa.len() != 2 || sb.len() != 2 || sa[1] != sb[0] {
            return Err(Error::dim("matmul", sa, sb));
        }
        let (m, k, n) = (sa[0], sa[1], sb[1]);
        let mut out = vec![0.0; m * n];
        gemm(m, k, n, self.value(a), Layout::RowMajor, self.value(b), Layout::RowMajor, &mut out, false);
        let rg = self.needs(a) || self.needs(b);
        Ok(self.push(vec![m, n], out, rg, Op::MatMul(a, b)))
    }

    /// Pointwise `add`, `sub` or `hadamard`. Shapes must match exactly, except
    /// that either operand may be a single-element scalar.
    pub fn elementwise(&mut self, kind: Elementwise, a: Var, b: Var) -> Result<Var> {
        let (sa, sb) = (self.shape(a).to_vec(), self.shape(b).to_vec());
        let (la, lb) = (self.value(a).len(), self.value(b).len());
        let shape = if sa == sb {
            sa
        } else if la == 1 {
            sb
        } else if lb == 1 {
            sa
        } else {
            return Err(Error::dim("elementwise", &sa, &sb));
        };
        let n = la.max(lb);
        let (va, vb) = (self.value(a), self.value(b));
        let f = |x: f64, y: f64| match kind {
            Elementwise::Add => x + y,
            Elementwise::Sub => x - y,
            Elementwise::Hadamard => x * y,
        };
        let out: Vec<f64> = (0..n)
            .map(|i| f(va[if la == 1 { 0 } else { i }], vb[if lb == 1 { 0 } else { i }]))
            .collect();
        let rg = self.needs(a) || self.needs(b);
        Ok(self.push(shape, out, rg, Op::Elementwise(kind, a, b)))
    }

    pub fn add(&mut self, a: Var, b: Var) -> Result<Var> {
        self.elementwise(Elementwise::Add, a, b)
    }

    pub fn sub(&mut self, a: Var, b: Var) -> Result<Var> {
        self.elementwise(Elementwise::Sub, a, b)
    }

    pub fn hadamard(&mut self, a: Var, b: Var) -> Result<Var> {
        self.elementwise(Elementwise::Hadamard, a, b)
    }

    /// Adds a bias row of width `d` to every row of an `n×d` matrix.
    pub fn add_bias(&mut self, x: Var, bias: Var) -> Result<Var> {
        let (sx, sb) = (self.shape(x), self.shape(bias));
        let d = *sx.last().unwrap_or(&1);
        if sx.len() != 2 || self.value(bias).len() != d {
            return Err(Error::dim("add_bias", sx, sb));
        }
        let shape = sx.to_vec();
        let b = self.value(bias);
        let out: Vec<f64> = self
            .value(x)
            .chunks(d)
            .flat_map(|row| row.iter().zip(b).map(|(r, b)| r + b))
            .collect();
        let rg = self.needs(x) || self.needs(bias);
        Ok(self.push(shape, out, rg, Op::AddBias(x, bias)))
    }

    pub fn scale(&mut self, x: Var, c: f64) -> Var {
        let out = self.value(x).iter().map(|v| v * c).collect();
        let shape = self.shape(x).to_vec();
        let rg = self.needs(x);
        self.push(shape, out, rg, Op::Scale(x, c))
    }

    pub fn activation(&mut self, kind: Activation, x: Var) -> Var {
        let out = self.value(x).iter().map(|&v| kind.apply(v)).collect();
        let shape = self.shape(x).to_vec();
        let rg = self.needs(x);
        self.push(shape, out, rg, Op::Activation(kind, x))
    }

    pub fn tanh(&mut self, x: Var) -> Var {
        self.activation(Activation::Tanh, x)
    }

    pub fn sigmoid(&mut self, x: Var) -> Var {
        self.activation(Activation::Sigmoid, x)
    }

    pub fn concat(&mut self, inputs: &[Var], axis: usize) -> Result<Var> {
        let first = *inputs
            .first()
            .ok_or_else(|| Error::invalid("concat of an empty list"))?;
        let base = self.shape(first).to_vec();
        if axis >= base.len() {
            return Err(Error::invalid(format!("concat axis {axis} out of range for rank {}", base.len())));
        }
        let mut total = 0;
        for &v in inputs {
            let s = self.shape(v);
            let conforming = s.len() == base.len()
                && s.iter().zip(&base).enumerate().all(|(i, (a, b))| i == axis || a == b);
            if !conforming {
                return Err(Error::dim("concat", &base, s));
            }
            total += s[axis];
        }
        let mut shape = base.clone();
        shape[axis] = total;
        let (outer, _, inner) = axis_split(&shape, axis);
        let mut out = Vec::with_capacity(outer * total * inner);
        for o in 0..outer {
            for &v in inputs {
                let ext = self.shape(v)[axis];
                let chunk = ext * inner;
                out.extend_from_slice(&self.value(v)[o * chunk..(o + 1) * chunk]);
            }
        }
        let rg = inputs.iter().any(|&v| self.needs(v));
        Ok(self.push(
            shape,
            out,
            rg,
            Op::Concat {
                inputs: inputs.to_vec(),
                axis,
            },
        ))
    }

    /// Slice `[start, start+len)` along `axis`.
    pub fn narrow(&mut self, x: Var, axis: usize, start: usize, len: usize) -> Result<Var> {
        let s = self.shape(x).to_vec();
        if axis >= s.len() || len == 0 || start + len > s[axis] {
            return Err(Error::invalid(format!(
                "narrow({axis}, {start}, {len}) out of range for shape {s:?}"
            )));
        }
        let (outer, ext, inner) = axis_split(&s, axis);
        let v = self.value(x);
        let mut out = Vec::with_capacity(outer * len * inner);
        for o in 0..outer {
            let base = o * ext * inner + start * inner;
            out.extend_from_slice(&v[base..base + len * inner]);
        }
        let mut shape = s;
        shape[axis] = len;
        let rg = self.needs(x);
        Ok(self.push(shape, out, rg, Op::Narrow { input: x, axis, start }))
    }

    /// Splits along `axis` into pieces of the given extents; inverse of [`Tape::concat`].
    pub fn split(&mut self, x: Var, axis: usize, sizes: &[usize]) -> Result<Vec<Var>> {
        let ext = self.shape(x).get(axis).copied().unwrap_or(0);
        if sizes.iter().sum::<usize>() != ext {
            return Err(Error::invalid(format!("split sizes {sizes:?} do not sum to {ext}")));
        }
        let mut start = 0;
        let mut out = Vec::with_capacity(sizes.len());
        for &len in sizes {
            out.push(self.narrow(x, axis, start, len)?);
            start += len;
        }
        Ok(out)
    }

    pub fn row(&mut self, x: Var, i: usize) -> Result<Var> {
        self.narrow(x, 0, i, 1)
    }

    pub fn transpose(&mut self, x: Var) -> Result<Var> {
        let s = self.shape(x);
        if s.len() != 2 {
            return Err(Error::dim("transpose", s, &[]));
        }
        let (m, n) = (s[0], s[1]);
        let v = self.value(x);
        let mut out = vec![0.0; m * n];
        for i in 0..m {
            for j in 0..n {
                out[j * m + i] = v[i * n + j];
            }
        }
        let rg = self.needs(x);
        Ok(self.push(vec![n, m], out, rg, Op::Transpose(x)))
    }

    /// Rows `ids` of an `r×d` table as an `ids.len()×d` matrix; rows may repeat.
    pub fn gather_rows(&mut self, table: Var, ids: &[usize]) -> Result<Var> {
        let s = self.shape(table);
        if s.len() != 2 || ids.is_empty() {
            return Err(Error::dim("gather_rows", s, &[ids.len()]));
        }
        let (r, d) = (s[0], s[1]);
        if let Some(&bad) = ids.iter().find(|&&i| i >= r) {
            return Err(Error::invalid(format!("row {bad} out of range for a table of {r} rows")));
        }
        let v = self.value(table);
        let mut out = Vec::with_capacity(ids.len() * d);
        for &i in ids {
            out.extend_from_slice(&v[i * d..(i + 1) * d]);
        }
        let rg = self.needs(table);
        Ok(self.push(
            vec![ids.len(), d],
            out,
            rg,
            Op::Gather {
                table,
                ids: ids.to_vec(),
            },
        ))
    }

    /// Softmax over every slice along `axis`, with max subtraction.
    pub fn softmax(&mut self, x: Var, axis: usize) -> Result<Var> {
        let s = self.shape(x).to_vec();
        if axis >= s.len() {
            return Err(Error::invalid(format!("softmax axis {axis} out of range for rank {}", s.len())));
        }
        let (outer, ext, inner) = axis_split(&s, axis);
        let v = self.value(x);
        let mut out = vec![0.0; v.len()];
        for o in 0..outer {
            for i in 0..inner {
                let idx = |k: usize| o * ext * inner + k * inner + i;
                let max = (0..ext).map(|k| v[idx(k)]).fold(f64::NEG_INFINITY, f64::max);
                let mut z = 0.0;
                for k in 0..ext {
                    let e = (v[idx(k)] - max).exp();
                    out[idx(k)] = e;
                    z += e;
                }
                for k in 0..ext {
                    out[idx(k)] /= z;
                }
            }
        }
        let rg = self.needs(x);
        Ok(self.push(s, out, rg, Op::Softmax { input: x, axis }))
    }

    /// Inverted dropout: zero with probability `p`, scale survivors by `1/(1-p)`.
    pub fn dropout<R: Rng + ?Sized>(&mut self, x: Var, p: f64, mode: DropoutMode, rng: &mut R) -> Result<Var> {
        if !(0.0..1.0).contains(&p) {
            return Err(Error::invalid(format!("dropout probability {p} outside [0, 1)")));
        }
        if mode == DropoutMode::Eval || p == 0.0 {
            return Ok(x);
        }
        let keep = 1.0 / (1.0 - p);
        let mask: Vec<f64> = (0..self.value(x).len())
            .map(|_| if rng.gen::<f64>() < p { 0.0 } else { keep })
            .collect();
        let out = self.value(x).iter().zip(&mask).map(|(v, m)| v * m).collect();
        let shape = self.shape(x).to_vec();
        let rg = self.needs(x);
        Ok(self.push(shape, out, rg, Op::Dropout { input: x, mask }))
    }

    /// Column-wise maximum of an `n×d` matrix, returned as a `1×d` row.
    /// Ties resolve to the first row.
    pub fn max_pool_over_time(&mut self, x: Var) -> Result<Var> {
        let s = self.shape(x);
        if s.len() != 2 || s[0] == 0 {
            return Err(Error::invalid("max pooling needs a non-empty n×d sequence"));
        }
        let (n, d) = (s[0], s[1]);
        let v = self.value(x);
        let mut out = v[..d].to_vec();
        let mut argmax = vec![0; d];
        for r in 1..n {
            for c in 0..d {
                if v[r * d + c] > out[c] {
                    out[c] = v[r * d + c];
                    argmax[c] = r;
                }
            }
        }
        let rg = self.needs(x);
        Ok(self.push(vec![1, d], out, rg, Op::MaxPool { input: x, argmax }))
    }

    /// Mean negative log-likelihood of `targets` under row-wise softmax of `b×C` logits.
    pub fn cross_entropy(&mut self, logits: Var, targets: &[usize]) -> Result<Var> {
        let s = self.shape(logits);
        if s.len() != 2 || s[0] != targets.len() {
            return Err(Error::dim("cross_entropy", s, &[targets.len()]));
        }
        let (b, c) = (s[0], s[1]);
        if let Some(&t) = targets.iter().find(|&&t| t >= c) {
            return Err(Error::invalid(format!("target class {t} out of range for {c} classes")));
        }
        let v = self.value(logits);
        let mut total = 0.0;
        for (r, &t) in targets.iter().enumerate() {
            let row = &v[r * c..(r + 1) * c];
            total += log_sum_exp(row) - row[t];
        }
        let rg = self.needs(logits);
        Ok(self.push(
            Vec::new(),
            vec![total / b as f64],
            rg,
            Op::CrossEntropy {
                logits,
                targets: targets.to_vec(),
            },
        ))
    }

    pub fn sum(&mut self, x: Var) -> Var {
        let total = self.value(x).iter().sum();
        let rg = self.needs(x);
        self.push(Vec::new(), vec![total], rg, Op::Sum(x))
    }

    /// Reverse sweep from a scalar `loss`.
    pub fn backward(&self, loss: Var) -> Result<Gradients> {
        if self.nodes[loss.0].value.len() != 1 {
            return Err(Error::invalid(format!(
                "backward needs a scalar loss, got shape {:?}",
                self.nodes[loss.0].shape
            )));
        }
        let mut grads: Vec<Option<Vec<f64>>> = vec![None; self.nodes.len()];
        grads[loss.0] = Some(vec![1.0]);
        for i in (0..=loss.0).rev() {
            let node = &self.nodes[i];
            if !node.requires_grad || matches!(node.op, Op::Leaf) {
                continue;
            }
            let Some(g) = grads[i].take() else { continue };
            self.propagate(node, &g, &mut grads);
        }
        for (i, node) in self.nodes.iter().enumerate() {
            if !(matches!(node.op, Op::Leaf) && node.requires_grad) {
                grads[i] = None;
            }
        }
        Ok(Gradients { grads })
    }

    fn propagate(&self, node: &Node, g: &[f64], grads: &mut [Option<Vec<f64>>]) {
        let nodes = &self.nodes;
        let mut acc = |v: Var, f: &mut dyn FnMut(&mut [f64])| {
            if !nodes[v.0].requires_grad {
                return;
            }
            let slot = grads[v.0].get_or_insert_with(|| vec![0.0; nodes[v.0].value.len()]);
            f(slot);
        };
        match &node.op {
            Op::Leaf => {}
            Op::MatMul(a, b) => {
                let (m, k) = (nodes[a.0].shape[0], nodes[a.0].shape[1]);
                let n = nodes[b.0].shape[1];
                acc(*a, &mut |ga| {
                    gemm(m, n, k, g, Layout::RowMajor, &nodes[b.0].value, Layout::Transposed, ga, true)
                });
                acc(*b, &mut |gb| {
                    gemm(k, m, n, &nodes[a.0].value, Layout::Transposed, g, Layout::RowMajor, gb, true)
                });
            }
            Op::Elementwise(kind, a, b) => {
                let (va, vb) = (&nodes[a.0].value, &nodes[b.0].value);
                let (la, lb) = (va.len(), vb.len());
                let pick = |v: &[f64], l: usize, i: usize| v[if l == 1 { 0 } else { i }];
                acc(*a, &mut |ga| {
                    for (i, gi) in g.iter().enumerate() {
                        let d = match kind {
                            Elementwise::Add | Elementwise::Sub => *gi,
                            Elementwise::Hadamard => gi * pick(vb, lb, i),
                        };
                        ga[if la == 1 { 0 } else { i }] += d;
                    }
                });
                acc(*b, &mut |gb| {
                    for (i, gi) in g.iter().enumerate() {
                        let d = match kind {
                            Elementwise::Add => *gi,
                            Elementwise::Sub => -gi,
                            Elementwise::Hadamard => gi * pick(va, la, i),
                        };
                        gb[if lb == 1 { 0 } else { i }] += d;
                    }
                });
            }
            Op::AddBias(x, bias) => {
                acc(*x, &mut |gx| gx.iter_mut().zip(g).for_each(|(a, b)| *a += b));
                let d = nodes[bias.0].value.len();
                acc(*bias, &mut |gb| {
                    for row in g.chunks(d) {
                        gb.iter_mut().zip(row).for_each(|(a, b)| *a += b);
                    }
                });
            }
            Op::Scale(x, c) => acc(*x, &mut |gx| gx.iter_mut().zip(g).for_each(|(a, b)| *a += b * c)),
            Op::Activation(kind, x) => acc(*x, &mut |gx| {
                for ((a, gi), y) in gx.iter_mut().zip(g).zip(&node.value) {
                    *a += gi * kind.derivative_from_output(*y);
                }
            }),
            Op::Concat { inputs, axis } => {
                let (outer, total, inner) = axis_split(&node.shape, *axis);
                let mut offset = 0;
                for &v in inputs {
                    let ext = nodes[v.0].shape[*axis];
                    acc(v, &mut |gv| {
                        for o in 0..outer {
                            let src = o * total * inner + offset * inner;
                            let dst = o * ext * inner;
                            for j in 0..ext * inner {
                                gv[dst + j] += g[src + j];
                            }
                        }
                    });
                    offset += ext;
                }
            }
            Op::Narrow { input, axis, start } => {
                let (outer, len, inner) = axis_split(&node.shape, *axis);
                let ext = nodes[input.0].shape[*axis];
                acc(*input, &mut |gi| {
                    for o in 0..outer {
                        let dst = o * ext * inner + start * inner;
                        let src = o * len * inner;
                        for j in 0..len * inner {
                            gi[dst + j] += g[src + j];
                        }
                    }
                });
            }
            Op::Transpose(x) => {
                let (n, m) = (node.shape[0], node.shape[1]);
                acc(*x, &mut |gx| {
                    for i in 0..m {
                        for j in 0..n {
                            gx[i * n + j] += g[j * m + i];
                        }
                    }
                });
            }
            Op::Gather { table, ids } => {
                let d = node.shape[1];
                acc(*table, &mut |gt| {
                    for (k, &i) in ids.iter().enumerate() {
                        for j in 0..d {
                            gt[i * d + j] += g[k * d + j];
                        }
                    }
                });
            }
            Op::Softmax { input, axis } => {
                let (outer, ext, inner) = axis_split(&node.shape, *axis);
                let y = &node.value;
                acc(*input, &mut |gx| {
                    for o in 0..outer {
                        for i in 0..inner {
                            let idx = |k: usize| o * ext * inner + k * inner + i;
                            let dot: f64 = (0..ext).map(|k| g[idx(k)] * y[idx(k)]).sum();
                            for k in 0..ext {
                                gx[idx(k)] += y[idx(k)] * (g[idx(k)] - dot);
                            }
                        }
                    }
                });
            }
            Op::Dropout { input, mask } => acc(*input, &mut |gx| {
                for ((a, gi), m) in gx.iter_mut().zip(g).zip(mask) {
                    *a += gi * m;
                }
            }),
            Op::MaxPool { input, argmax } => {
                let d = argmax.len();
                acc(*input, &mut |gx| {
                    for (c, &r) in argmax.iter().enumerate() {
                        gx[r * d + c] += g[c];
                    }
                });
            }
            Op::CrossEntropy { logits, targets } => {
                let c = nodes[logits.0].shape[1];
                let b = targets.len() as f64;
                let v = &nodes[logits.0].value;
                acc(*logits, &mut |gl| {
                    for (r, &t) in targets.iter().enumerate() {
                        let row = &v[r * c..(r + 1) * c];
                        let lse = log_sum_exp(row);
                        for k in 0..c {
                            let p = (row[k] - lse).exp();
                            let onehot = if k == t { 1.0 } else { 0.0 };
                            gl[r * c + k] += g[0] * (p - onehot) / b;
                        }
                    }
                });
            }
            Op::Sum(x) => acc(*x, &mut |gx| gx.iter_mut().for_each(|a| *a += g[0])),
        }
    }
}

pub(crate) fn log_sum_exp(row: &[f64]) -> f64 {
    let max = row.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    max + row.iter().map(|v| (v - max).exp()).sum::<f64>().ln()
}

#[derive(Clone, Copy)]
enum Layout {
    RowMajor,
    Transposed,
}

/// `out (m×n) (+)= a (m×k) · b (k×n)`, where `Transposed` means the stored
/// buffer is the transpose of the logical operand.
#[allow(clippy::too_many_arguments)]
fn gemm(m: usize, k: usize, n: usize, a: &[f64], la: Layout, b: &[f64], lb: Layout, out: &mut [f64], accumulate: bool) {
    let (rsa, csa) = match la {
        Layout::RowMajor => (k as isize, 1),
        Layout::Transposed => (1, m as isize),
    };
    let (rsb, csb) = match lb {
        Layout::RowMajor => (n as isize, 1),
        Layout::Transposed => (1, k as isize),
    };
    let beta = if accumulate { 1.0 } else { 0.0 };
    // SAFETY: the strides above describe exactly the m×k, k×n and m×n
    // row-major buffers whose lengths the callers have checked.
    unsafe {
        matrixmultiply::dgemm(
            m,
            k,
            n,
            1.0,
            a.as_ptr(),
            rsa,
            csa,
            b.as_ptr(),
            rsb,
            csb,
            beta,
            out.as_mut_ptr(),
            n as isize,
            1,
        );
    }
}
