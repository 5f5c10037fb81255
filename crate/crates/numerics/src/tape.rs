//! Tape-based reverse-mode differentiation over dense f64 arrays.
//!
//! A forward pass appends nodes to the tape (values are computed eagerly);
//! `backward` walks the tape in reverse and accumulates gradients into every
//! node that transitively depends on a trainable parameter leaf. The op set
//! is exactly what the encoder, Q-former and decoder need. Arrays of rank 1
//! are treated as single-row matrices by the matrix ops.

use std::collections::BTreeMap;

use crate::{Array, NumericsError, ParamSet, Result, Rng};

/// Handle to a tape node.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Var(usize);

enum Op {
    Leaf,
    Param(String),
    MatMul(Var, Var),
    MatMulNT(Var, Var),
    Add(Var, Var),
    Sub(Var, Var),
    Mul(Var, Var),
    AddRow(Var, Var),
    Scale(Var, f64),
    Gelu(Var),
    SoftmaxLast(Var),
    LayerNorm {
        x: Var,
        gain: Var,
        bias: Var,
        eps: f64,
    },
    ConcatRows(Vec<Var>),
    ConcatCols(Vec<Var>),
    SliceRows(Var, usize, usize),
    GatherRows(Var, Vec<usize>),
    Dropout(Var, Vec<f64>),
    SumAll(Var),
    MeanAll(Var),
    SqNorm(Var),
    CrossEntropyLogits(Var, Vec<usize>),
}

struct Node {
    value: Array,
    op: Op,
    needs_grad: bool,
}

#[derive(Default)]
pub struct Tape {
    nodes: Vec<Node>,
    params: BTreeMap<String, Var>,
    grads: Vec<Option<Array>>,
}

impl Tape {
    pub fn new() -> Tape {
        Tape::default()
    }

    fn push(&mut self, value: Array, op: Op, needs_grad: bool) -> Var {
        self.nodes.push(Node {
            value,
            op,
            needs_grad,
        });
        Var(self.nodes.len() - 1)
    }

    fn needs(&self, v: Var) -> bool {
        self.nodes[v.0].needs_grad
    }

    pub fn value(&self, v: Var) -> &Array {
        &self.nodes[v.0].value
    }

    /// Gradient of the last `backward` loss w.r.t. this node, if it was
    /// reached.
    pub fn grad(&self, v: Var) -> Option<&Array> {
        self.grads.get(v.0).and_then(|g| g.as_ref())
    }

    /// Constant leaf; never accumulates a gradient.
    pub fn input(&mut self, value: Array) -> Var {
        self.push(value, Op::Leaf, false)
    }

    /// Parameter leaf. Values are copied out of the set once per tape; a
    /// second registration of the same name returns the cached var. Only
    /// trainable parameters request gradients.
    pub fn param(&mut self, ps: &ParamSet, name: &str) -> Var {
        if let Some(&v) = self.params.get(name) {
            return v;
        }
        let p = ps.get(name);
        let v = self.push(p.value.clone(), Op::Param(name.to_string()), p.trainable);
        self.params.insert(name.to_string(), v);
        v
    }

    pub fn matmul(&mut self, a: Var, b: Var) -> Var {
        let value = self.value(a).matmul(self.value(b));
        let ng = self.needs(a) || self.needs(b);
        self.push(value, Op::MatMul(a, b), ng)
    }

    /// a · bᵀ.
    pub fn matmul_nt(&mut self, a: Var, b: Var) -> Var {
        let value = self.value(a).matmul_nt(self.value(b));
        let ng = self.needs(a) || self.needs(b);
        self.push(value, Op::MatMulNT(a, b), ng)
    }

    pub fn add(&mut self, a: Var, b: Var) -> Var {
        let (va, vb) = (self.value(a), self.value(b));
        assert_eq!(va.shape(), vb.shape(), "add shape mismatch");
        let data = va
            .data()
            .iter()
            .zip(vb.data())
            .map(|(x, y)| x + y)
            .collect();
        let value = Array::from_raw(va.shape().to_vec(), data);
        let ng = self.needs(a) || self.needs(b);
        self.push(value, Op::Add(a, b), ng)
    }

    pub fn sub(&mut self, a: Var, b: Var) -> Var {
        let (va, vb) = (self.value(a), self.value(b));
        assert_eq!(va.shape(), vb.shape(), "sub shape mismatch");
        let data = va
            .data()
            .iter()
            .zip(vb.data())
            .map(|(x, y)| x - y)
            .collect();
        let value = Array::from_raw(va.shape().to_vec(), data);
        let ng = self.needs(a) || self.needs(b);
        self.push(value, Op::Sub(a, b), ng)
    }

    pub fn mul(&mut self, a: Var, b: Var) -> Var {
        let (va, vb) = (self.value(a), self.value(b));
        assert_eq!(va.shape(), vb.shape(), "mul shape mismatch");
        let data = va
            .data()
            .iter()
            .zip(vb.data())
            .map(|(x, y)| x * y)
            .collect();
        let value = Array::from_raw(va.shape().to_vec(), data);
        let ng = self.needs(a) || self.needs(b);
        self.push(value, Op::Mul(a, b), ng)
    }

    /// [m,n] + [n] row-broadcast bias.
    pub fn add_row(&mut self, a: Var, bias: Var) -> Var {
        let (va, vb) = (self.value(a), self.value(bias));
        let n = va.cols();
        assert_eq!(vb.len(), n, "add_row bias length");
        let mut data = va.data().to_vec();
        for row in data.chunks_mut(n) {
            for (x, b) in row.iter_mut().zip(vb.data()) {
                *x += b;
            }
        }
        let value = Array::from_raw(va.shape().to_vec(), data);
        let ng = self.needs(a) || self.needs(bias);
        self.push(value, Op::AddRow(a, bias), ng)
    }

    pub fn scale(&mut self, a: Var, c: f64) -> Var {
        let va = self.value(a);
        let data = va.data().iter().map(|x| x * c).collect();
        let value = Array::from_raw(va.shape().to_vec(), data);
        let ng = self.needs(a);
        self.push(value, Op::Scale(a, c), ng)
    }

    pub fn gelu(&mut self, a: Var) -> Var {
        let va = self.value(a);
        let data = va.data().iter().map(|&x| gelu_val(x)).collect();
        let value = Array::from_raw(va.shape().to_vec(), data);
        let ng = self.needs(a);
        self.push(value, Op::Gelu(a), ng)
    }

    pub fn softmax_last(&mut self, a: Var) -> Var {
        let va = self.value(a);
        let value = softmax(va).expect("softmax over empty axis");
        let ng = self.needs(a);
        self.push(value, Op::SoftmaxLast(a), ng)
    }

    /// Layer normalization over the last axis with per-feature gain/bias.
    pub fn layer_norm(&mut self, x: Var, gain: Var, bias: Var, eps: f64) -> Var {
        let vx = self.value(x);
        let n = vx.cols();
        assert_eq!(self.value(gain).len(), n, "layer_norm gain length");
        assert_eq!(self.value(bias).len(), n, "layer_norm bias length");
        let g = self.value(gain).data().to_vec();
        let b = self.value(bias).data().to_vec();
        let mut data = Vec::with_capacity(vx.len());
        for row in vx.data().chunks(n) {
            let mean = row.iter().sum::<f64>() / n as f64;
            let var = row.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n as f64;
            let inv = 1.0 / (var + eps).sqrt();
            for j in 0..n {
                data.push((row[j] - mean) * inv * g[j] + b[j]);
            }
        }
        let value = Array::from_raw(vx.shape().to_vec(), data);
        let ng = self.needs(x) || self.needs(gain) || self.needs(bias);
        self.push(value, Op::LayerNorm { x, gain, bias, eps }, ng)
    }

    pub fn concat_rows(&mut self, parts: &[Var]) -> Var {
        assert!(!parts.is_empty());
        let cols = self.value(parts[0]).cols();
        let mut rows = 0;
        let mut data = Vec::new();
        for &p in parts {
            let v = self.value(p);
            assert_eq!(v.cols(), cols, "concat_rows column mismatch");
            rows += v.rows();
            data.extend_from_slice(v.data());
        }
        let value = Array::from_raw(vec![rows, cols], data);
        let ng = parts.iter().any(|&p| self.needs(p));
        self.push(value, Op::ConcatRows(parts.to_vec()), ng)
    }

    pub fn concat_cols(&mut self, parts: &[Var]) -> Var {
        assert!(!parts.is_empty());
        let rows = self.value(parts[0]).rows();
        let total: usize = parts.iter().map(|&p| self.value(p).cols()).sum();
        let mut data = Vec::with_capacity(rows * total);
        for i in 0..rows {
            for &p in parts {
                let v = self.value(p);
                assert_eq!(v.rows(), rows, "concat_cols row mismatch");
                data.extend_from_slice(v.row(i));
            }
        }
        let value = Array::from_raw(vec![rows, total], data);
        let ng = parts.iter().any(|&p| self.needs(p));
        self.push(value, Op::ConcatCols(parts.to_vec()), ng)
    }

    /// Rows [from, to) of a matrix.
    pub fn slice_rows(&mut self, a: Var, from: usize, to: usize) -> Var {
        let va = self.value(a);
        let cols = va.cols();
        assert!(from <= to && to <= va.rows(), "slice_rows bounds");
        let data = va.data()[from * cols..to * cols].to_vec();
        let value = Array::from_raw(vec![to - from, cols], data);
        let ng = self.needs(a);
        self.push(value, Op::SliceRows(a, from, to), ng)
    }

    /// Embedding-style row gather; backward scatter-adds into the table.
    pub fn gather_rows(&mut self, table: Var, ids: &[usize]) -> Var {
        let vt = self.value(table);
        let cols = vt.cols();
        let mut data = Vec::with_capacity(ids.len() * cols);
        for &id in ids {
            assert!(id < vt.rows(), "gather_rows id {id} out of range");
            data.extend_from_slice(vt.row(id));
        }
        let value = Array::from_raw(vec![ids.len(), cols], data);
        let ng = self.needs(table);
        self.push(value, Op::GatherRows(table, ids.to_vec()), ng)
    }

    /// Inverted dropout: keep with probability 1-rate, scale kept entries by
    /// 1/(1-rate). `rate == 0` is the identity and consumes no randomness.
    pub fn dropout(&mut self, a: Var, rate: f64, rng: &mut Rng) -> Var {
        assert!((0.0..1.0).contains(&rate), "dropout rate {rate}");
        if rate == 0.0 {
            return a;
        }
        let keep = 1.0 - rate;
        let n = self.value(a).len();
        let mask: Vec<f64> = (0..n)
            .map(|_| if rng.uniform() < keep { 1.0 / keep } else { 0.0 })
            .collect();
        let va = self.value(a);
        let data = va.data().iter().zip(&mask).map(|(x, m)| x * m).collect();
        let value = Array::from_raw(va.shape().to_vec(), data);
        let ng = self.needs(a);
        self.push(value, Op::Dropout(a, mask), ng)
    }

    pub fn sum_all(&mut self, a: Var) -> Var {
        let s = self.value(a).data().iter().sum();
        let ng = self.needs(a);
        self.push(Array::from_raw(vec![1], vec![s]), Op::SumAll(a), ng)
    }

    pub fn mean_all(&mut self, a: Var) -> Var {
        let va = self.value(a);
        let s = va.data().iter().sum::<f64>() / va.len() as f64;
        let ng = self.needs(a);
        self.push(Array::from_raw(vec![1], vec![s]), Op::MeanAll(a), ng)
    }

    /// Sum of squared entries, as a scalar node.
    pub fn sq_norm(&mut self, a: Var) -> Var {
        let s = self.value(a).sq_norm();
        let ng = self.needs(a);
        self.push(Array::from_raw(vec![1], vec![s]), Op::SqNorm(a), ng)
    }

    /// Summed token cross-entropy from logits [m, vocab] and m target ids,
    /// computed with a stable log-sum-exp.
    pub fn cross_entropy_logits(&mut self, logits: Var, targets: &[usize]) -> Var {
        let vl = self.value(logits);
        assert_eq!(vl.rows(), targets.len(), "cross_entropy target count");
        let mut total = 0.0;
        for (row, &t) in vl.data().chunks(vl.cols()).zip(targets) {
            assert!(t < vl.cols(), "target id {t} out of vocab");
            total += log_sum_exp(row) - row[t];
        }
        let ng = self.needs(logits);
        self.push(
            Array::from_raw(vec![1], vec![total]),
            Op::CrossEntropyLogits(logits, targets.to_vec()),
            ng,
        )
    }

    /// Per-position cross-entropy values for the same logits/targets, read
    /// from the forward values (no tape node).
    pub fn per_position_ce(&self, logits: Var, targets: &[usize]) -> Vec<f64> {
        let vl = self.value(logits);
        vl.data()
            .chunks(vl.cols())
            .zip(targets)
            .map(|(row, &t)| log_sum_exp(row) - row[t])
            .collect()
    }

    fn add_grad(grads: &mut [Option<Array>], nodes: &[Node], v: Var, g: &Array) {
        if !nodes[v.0].needs_grad {
            return;
        }
        match &mut grads[v.0] {
            Some(acc) => acc.add_assign(g),
            slot @ None => *slot = Some(g.clone()),
        }
    }

    /// Reverse pass from a scalar loss node. Gradients accumulate only into
    /// nodes flagged as needing them.
    pub fn backward(&mut self, loss: Var) {
        assert_eq!(self.value(loss).len(), 1, "backward needs a scalar loss");
        let n = self.nodes.len();
        let mut grads: Vec<Option<Array>> = (0..n).map(|_| None).collect();
        if self.nodes[loss.0].needs_grad {
            grads[loss.0] = Some(Array::from_raw(vec![1], vec![1.0]));
        }
        for idx in (0..n).rev() {
            let g = match grads[idx].as_ref() {
                Some(g) => g.clone(),
                None => continue,
            };
            let nodes = &self.nodes;
            match &nodes[idx].op {
                Op::Leaf | Op::Param(_) => {}
                Op::MatMul(a, b) => {
                    if nodes[a.0].needs_grad {
                        let da = g.matmul_nt(&nodes[b.0].value);
                        Self::add_grad(&mut grads, nodes, *a, &da);
                    }
                    if nodes[b.0].needs_grad {
                        let db = nodes[a.0].value.matmul_tn(&g);
                        Self::add_grad(&mut grads, nodes, *b, &db);
                    }
                }
                Op::MatMulNT(a, b) => {
                    if nodes[a.0].needs_grad {
                        let da = g.matmul(&nodes[b.0].value);
                        Self::add_grad(&mut grads, nodes, *a, &da);
                    }
                    if nodes[b.0].needs_grad {
                        let db = g.matmul_tn(&nodes[a.0].value);
                        Self::add_grad(&mut grads, nodes, *b, &db);
                    }
                }
                Op::Add(a, b) => {
                    Self::add_grad(&mut grads, nodes, *a, &g);
                    Self::add_grad(&mut grads, nodes, *b, &g);
                }
                Op::Sub(a, b) => {
                    Self::add_grad(&mut grads, nodes, *a, &g);
                    if nodes[b.0].needs_grad {
                        let mut neg = g.clone();
                        neg.scale_assign(-1.0);
                        Self::add_grad(&mut grads, nodes, *b, &neg);
                    }
                }
                Op::Mul(a, b) => {
                    if nodes[a.0].needs_grad {
                        let data = g
                            .data()
                            .iter()
                            .zip(nodes[b.0].value.data())
                            .map(|(x, y)| x * y)
                            .collect();
                        let da = Array::from_raw(g.shape().to_vec(), data);
                        Self::add_grad(&mut grads, nodes, *a, &da);
                    }
                    if nodes[b.0].needs_grad {
                        let data = g
                            .data()
                            .iter()
                            .zip(nodes[a.0].value.data())
                            .map(|(x, y)| x * y)
                            .collect();
                        let db = Array::from_raw(g.shape().to_vec(), data);
                        Self::add_grad(&mut grads, nodes, *b, &db);
                    }
                }
                Op::AddRow(a, bias) => {
                    Self::add_grad(&mut grads, nodes, *a, &g);
                    if nodes[bias.0].needs_grad {
                        let cols = nodes[bias.0].value.len();
                        let mut db = vec![0.0; cols];
                        for row in g.data().chunks(cols) {
                            for (acc, x) in db.iter_mut().zip(row) {
                                *acc += x;
                            }
                        }
                        let db = Array::from_raw(vec![cols], db);
                        Self::add_grad(&mut grads, nodes, *bias, &db);
                    }
                }
                Op::Scale(a, c) => {
                    if nodes[a.0].needs_grad {
                        let mut da = g.clone();
                        da.scale_assign(*c);
                        Self::add_grad(&mut grads, nodes, *a, &da);
                    }
                }
                Op::Gelu(a) => {
                    if nodes[a.0].needs_grad {
                        let data = g
                            .data()
                            .iter()
                            .zip(nodes[a.0].value.data())
                            .map(|(gy, &x)| gy * gelu_grad(x))
                            .collect();
                        let da = Array::from_raw(g.shape().to_vec(), data);
                        Self::add_grad(&mut grads, nodes, *a, &da);
                    }
                }
                Op::SoftmaxLast(a) => {
                    if nodes[a.0].needs_grad {
                        let y = &nodes[idx].value;
                        let cols = y.cols();
                        let mut da = Vec::with_capacity(y.len());
                        for (yrow, grow) in y.data().chunks(cols).zip(g.data().chunks(cols)) {
                            let dot: f64 = yrow.iter().zip(grow).map(|(yi, gi)| yi * gi).sum();
                            for (yi, gi) in yrow.iter().zip(grow) {
                                da.push(yi * (gi - dot));
                            }
                        }
                        let da = Array::from_raw(y.shape().to_vec(), da);
                        Self::add_grad(&mut grads, nodes, *a, &da);
                    }
                }
                Op::LayerNorm { x, gain, bias, eps } => {
                    let vx = &nodes[x.0].value;
                    let n_cols = vx.cols();
                    let gvals = nodes[gain.0].value.data();
                    let mut dx = vec![0.0; vx.len()];
                    let mut dg = vec![0.0; n_cols];
                    let mut db = vec![0.0; n_cols];
                    for (r, (xrow, grow)) in vx
                        .data()
                        .chunks(n_cols)
                        .zip(g.data().chunks(n_cols))
                        .enumerate()
                    {
                        let mean = xrow.iter().sum::<f64>() / n_cols as f64;
                        let var = xrow.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>()
                            / n_cols as f64;
                        let inv = 1.0 / (var + eps).sqrt();
                        let xhat: Vec<f64> = xrow.iter().map(|v| (v - mean) * inv).collect();
                        let dyh: Vec<f64> =
                            grow.iter().zip(gvals).map(|(gy, gv)| gy * gv).collect();
                        let mean_dyh = dyh.iter().sum::<f64>() / n_cols as f64;
                        let mean_dyh_xhat = dyh
                            .iter()
                            .zip(&xhat)
                            .map(|(d, xh)| d * xh)
                            .sum::<f64>()
                            / n_cols as f64;
                        for j in 0..n_cols {
                            dx[r * n_cols + j] =
                                inv * (dyh[j] - mean_dyh - xhat[j] * mean_dyh_xhat);
                            dg[j] += grow[j] * xhat[j];
                            db[j] += grow[j];
                        }
                    }
                    if nodes[x.0].needs_grad {
                        let dx = Array::from_raw(vx.shape().to_vec(), dx);
                        Self::add_grad(&mut grads, nodes, *x, &dx);
                    }
                    if nodes[gain.0].needs_grad {
                        let dg = Array::from_raw(vec![n_cols], dg);
                        Self::add_grad(&mut grads, nodes, *gain, &dg);
                    }
                    if nodes[bias.0].needs_grad {
                        let db = Array::from_raw(vec![n_cols], db);
                        Self::add_grad(&mut grads, nodes, *bias, &db);
                    }
                }
                Op::ConcatRows(parts) => {
                    let cols = nodes[idx].value.cols();
                    let mut offset = 0;
                    for &p in parts {
                        let r = nodes[p.0].value.rows();
                        if nodes[p.0].needs_grad {
                            let chunk =
                                g.data()[offset * cols..(offset + r) * cols].to_vec();
                            let dp = Array::from_raw(nodes[p.0].value.shape().to_vec(), chunk);
                            Self::add_grad(&mut grads, nodes, p, &dp);
                        }
                        offset += r;
                    }
                }
                Op::ConcatCols(parts) => {
                    let rows = nodes[idx].value.rows();
                    let total = nodes[idx].value.cols();
                    let mut offset = 0;
                    for &p in parts {
                        let c = nodes[p.0].value.cols();
                        if nodes[p.0].needs_grad {
                            let mut dp = Vec::with_capacity(rows * c);
                            for i in 0..rows {
                                let row = &g.data()[i * total..(i + 1) * total];
                                dp.extend_from_slice(&row[offset..offset + c]);
                            }
                            let dp = Array::from_raw(nodes[p.0].value.shape().to_vec(), dp);
                            Self::add_grad(&mut grads, nodes, p, &dp);
                        }
                        offset += c;
                    }
                }
                Op::SliceRows(a, from, _to) => {
                    if nodes[a.0].needs_grad {
                        let cols = nodes[a.0].value.cols();
                        let mut da = Array::zeros(nodes[a.0].value.shape());
                        da.data_mut()[from * cols..from * cols + g.len()]
                            .copy_from_slice(g.data());
                        Self::add_grad(&mut grads, nodes, *a, &da);
                    }
                }
                Op::GatherRows(table, ids) => {
                    if nodes[table.0].needs_grad {
                        let cols = nodes[table.0].value.cols();
                        let mut dt = Array::zeros(nodes[table.0].value.shape());
                        for (i, &id) in ids.iter().enumerate() {
                            let dst = &mut dt.data_mut()[id * cols..(id + 1) * cols];
                            for (d, s) in dst.iter_mut().zip(&g.data()[i * cols..(i + 1) * cols])
                            {
                                *d += s;
                            }
                        }
                        Self::add_grad(&mut grads, nodes, *table, &dt);
                    }
                }
                Op::Dropout(a, mask) => {
                    if nodes[a.0].needs_grad {
                        let data = g.data().iter().zip(mask).map(|(x, m)| x * m).collect();
                        let da = Array::from_raw(g.shape().to_vec(), data);
                        Self::add_grad(&mut grads, nodes, *a, &da);
                    }
                }
                Op::SumAll(a) => {
                    if nodes[a.0].needs_grad {
                        let da = Array::full(nodes[a.0].value.shape(), g.data()[0])
                            .expect("finite grad");
                        Self::add_grad(&mut grads, nodes, *a, &da);
                    }
                }
                Op::MeanAll(a) => {
                    if nodes[a.0].needs_grad {
                        let c = g.data()[0] / nodes[a.0].value.len() as f64;
                        let da = Array::full(nodes[a.0].value.shape(), c).expect("finite grad");
                        Self::add_grad(&mut grads, nodes, *a, &da);
                    }
                }
                Op::SqNorm(a) => {
                    if nodes[a.0].needs_grad {
                        let c = 2.0 * g.data()[0];
                        let data = nodes[a.0].value.data().iter().map(|x| c * x).collect();
                        let da = Array::from_raw(nodes[a.0].value.shape().to_vec(), data);
                        Self::add_grad(&mut grads, nodes, *a, &da);
                    }
                }
                Op::CrossEntropyLogits(logits, targets) => {
                    if nodes[logits.0].needs_grad {
                        let vl = &nodes[logits.0].value;
                        let cols = vl.cols();
                        let scale = g.data()[0];
                        let mut dl = Vec::with_capacity(vl.len());
                        for (row, &t) in vl.data().chunks(cols).zip(targets) {
                            let lse = log_sum_exp(row);
                            for (j, &x) in row.iter().enumerate() {
                                let p = (x - lse).exp();
                                let onehot = if j == t { 1.0 } else { 0.0 };
                                dl.push(scale * (p - onehot));
                            }
                        }
                        let dl = Array::from_raw(vl.shape().to_vec(), dl);
                        Self::add_grad(&mut grads, nodes, *logits, &dl);
                    }
                }
            }
        }
        self.grads = grads;
        // Re-seed the loss grad slot so callers can inspect it.
        if self.nodes[loss.0].needs_grad && self.grads[loss.0].is_none() {
            self.grads[loss.0] = Some(Array::from_raw(vec![1], vec![1.0]));
        }
    }

    /// Move accumulated parameter gradients into the set (adding to whatever
    /// is already there, so batches can accumulate across tapes).
    pub fn accumulate_param_grads(&self, ps: &mut ParamSet) {
        for (name, var) in &self.params {
            if let Some(g) = self.grad(*var) {
                ps.get_mut(name).gradient.add_assign(g);
            }
        }
    }
}

/// Numerically stable softmax over the last axis. Shift-invariant; errors on
/// an empty last axis.
pub fn softmax(a: &Array) -> Result<Array> {
    let cols = a.cols();
    if cols == 0 {
        return Err(NumericsError::EmptyAxis);
    }
    let mut data = Vec::with_capacity(a.len());
    for row in a.data().chunks(cols) {
        let m = row.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let exps: Vec<f64> = row.iter().map(|&x| (x - m).exp()).collect();
        let sum: f64 = exps.iter().sum();
        data.extend(exps.into_iter().map(|e| e / sum));
    }
    Ok(Array::from_raw(a.shape().to_vec(), data))
}

fn log_sum_exp(row: &[f64]) -> f64 {
    let m = row.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    m + row.iter().map(|&x| (x - m).exp()).sum::<f64>().ln()
}

const GELU_C: f64 = 0.797_884_560_802_865_4; // sqrt(2/pi)
const GELU_A: f64 = 0.044_715;

fn gelu_val(x: f64) -> f64 {
    0.5 * x * (1.0 + (GELU_C * (x + GELU_A * x * x * x)).tanh())
}

fn gelu_grad(x: f64) -> f64 {
    let u = GELU_C * (x + GELU_A * x * x * x);
    let t = u.tanh();
    let sech2 = 1.0 - t * t;
    0.5 * (1.0 + t) + 0.5 * x * sech2 * GELU_C * (1.0 + 3.0 * GELU_A * x * x)
}
