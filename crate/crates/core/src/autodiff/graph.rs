//! Tape of tensor operations with reverse-mode differentiation.
//!
//! Every operation evaluates eagerly. When gradients are enabled and at least
//! one input is tracked, the operation is appended to the tape, so the node
//! order is a topological order. Constants and parameters used under
//! [`Graph::no_grad`] never enter the tape, which keeps inference memory
//! proportional to the live values only.

use std::sync::Arc;

use super::tensor::{gemm, log_softmax_into, sigmoid, Tensor};
use crate::error::{Error, Result};

/// Index of a trainable tensor inside a [`ParamSet`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ParamId(pub usize);

/// Named, ordered collection of trainable tensors.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct ParamSet {
    names: Vec<String>,
    values: Vec<Arc<Tensor>>,
}

impl ParamSet {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn push(&mut self, name: impl Into<String>, value: Tensor) -> ParamId {
        self.names.push(name.into());
        self.values.push(Arc::new(value));
        ParamId(self.values.len() - 1)
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn get(&self, id: ParamId) -> &Tensor {
        &self.values[id.0]
    }

    pub(crate) fn shared(&self, id: ParamId) -> Arc<Tensor> {
        Arc::clone(&self.values[id.0])
    }

    /// Copy-on-write access; cheap once no graph holds the tensor.
    pub fn get_mut(&mut self, id: ParamId) -> &mut Tensor {
        Arc::make_mut(&mut self.values[id.0])
    }

    pub fn name(&self, id: ParamId) -> &str {
        &self.names[id.0]
    }

    pub fn id_of(&self, name: &str) -> Option<ParamId> {
        self.names.iter().position(|n| n == name).map(ParamId)
    }

    pub fn ids(&self) -> impl Iterator<Item = ParamId> {
        (0..self.values.len()).map(ParamId)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, &Tensor)> {
        self.names
            .iter()
            .map(String::as_str)
            .zip(self.values.iter().map(|v| v.as_ref()))
    }

    pub fn element_count(&self) -> usize {
        self.values.iter().map(|v| v.len()).sum()
    }
}

/// A value produced on a [`Graph`]. Cloning is cheap.
#[derive(Clone, Debug)]
pub struct Var {
    value: Arc<Tensor>,
    node: Option<usize>,
}

impl Var {
    pub fn value(&self) -> &Tensor {
        &self.value
    }

    pub fn shape(&self) -> &[usize] {
        self.value.shape()
    }

    pub fn is_tracked(&self) -> bool {
        self.node.is_some()
    }

    pub fn node(&self) -> Option<usize> {
        self.node
    }
}

#[derive(Debug)]
enum Op {
    Param(ParamId),
    MatMul(Var, Var),
    MatMulNt(Var, Var),
    Add(Var, Var),
    AddRow(Var, Var),
    Mul(Var, Var),
    Scale(Var, f64),
    Sigmoid(Var),
    Tanh(Var),
    Relu(Var),
    ConcatCols(Vec<Var>),
    SliceCols(Var, usize),
    ConcatRows(Vec<Var>),
    SliceRows(Var, usize),
    GatherRows(Var, Vec<usize>),
    LogSoftmaxRows(Var),
    PickSum(Var, Vec<Option<usize>>),
    Sum(Var),
    KlRows(Arc<Tensor>, Var, Vec<bool>),
    RowGroupDot(Var, Var),
}

#[derive(Debug)]
struct Node {
    op: Op,
    value: Arc<Tensor>,
}

/// Gradients of a scalar loss with respect to every parameter of a set.
#[derive(Clone, Debug)]
pub struct Gradients {
    grads: Vec<Tensor>,
}

impl Gradients {
    pub fn get(&self, id: ParamId) -> &Tensor {
        &self.grads[id.0]
    }

    pub fn iter(&self) -> impl Iterator<Item = (ParamId, &Tensor)> {
        self.grads.iter().enumerate().map(|(i, g)| (ParamId(i), g))
    }

    pub fn is_finite(&self) -> bool {
        self.grads.iter().all(Tensor::is_finite)
    }
}

/// Computation graph. Node ids are tape positions.
#[derive(Debug)]
pub struct Graph {
    nodes: Vec<Node>,
    grad_enabled: bool,
}

impl Default for Graph {
    fn default() -> Self {
        Self::new()
    }
}

impl Graph {
    pub fn new() -> Self {
        Graph {
            nodes: Vec::new(),
            grad_enabled: true,
        }
    }

    /// A graph that evaluates without recording anything.
    pub fn no_grad() -> Self {
        Graph {
            nodes: Vec::new(),
            grad_enabled: false,
        }
    }

    pub fn grad_enabled(&self) -> bool {
        self.grad_enabled
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    fn record(&mut self, value: Tensor, inputs: &[&Var], op: impl FnOnce() -> Op) -> Var {
        let value = Arc::new(value);
        let node = if self.grad_enabled && inputs.iter().any(|v| v.node.is_some()) {
            self.nodes.push(Node {
                op: op(),
                value: Arc::clone(&value),
            });
            Some(self.nodes.len() - 1)
        } else {
            None
        };
        Var { value, node }
    }

    pub fn constant(&mut self, value: Tensor) -> Var {
        Var {
            value: Arc::new(value),
            node: None,
        }
    }

    pub fn param(&mut self, params: &ParamSet, id: ParamId) -> Var {
        let value = params.shared(id);
        if !self.grad_enabled {
            return Var { value, node: None };
        }
        self.nodes.push(Node {
            op: Op::Param(id),
            value: Arc::clone(&value),
        });
        Var {
            value,
            node: Some(self.nodes.len() - 1),
        }
    }

    pub fn matmul(&mut self, a: &Var, b: &Var) -> Result<Var> {
        let out = super::tensor::matmul(a.value(), b.value())?;
        Ok(self.record(out, &[a, b], || Op::MatMul(a.clone(), b.clone())))
    }

    /// `a * bᵀ`
    pub fn matmul_nt(&mut self, a: &Var, b: &Var) -> Result<Var> {
        let out = super::tensor::matmul_nt(a.value(), b.value())?;
        Ok(self.record(out, &[a, b], || Op::MatMulNt(a.clone(), b.clone())))
    }

    pub fn add(&mut self, a: &Var, b: &Var) -> Result<Var> {
        check_same(a, b, "add")?;
        let mut out = a.value().clone();
        out.add_assign(b.value());
        Ok(self.record(out, &[a, b], || Op::Add(a.clone(), b.clone())))
    }

    /// Adds a bias vector to every row of a matrix.
    pub fn add_row(&mut self, a: &Var, bias: &Var) -> Result<Var> {
        let cols = a.value().cols();
        if bias.value().len() != cols {
            return Err(Error::invalid(format!(
                "add_row: bias of {} values for {} columns",
                bias.value().len(),
                cols
            )));
        }
        let mut out = a.value().clone();
        let b = bias.value().data();
        for r in 0..out.rows() {
            for (o, x) in out.row_mut(r).iter_mut().zip(b) {
                *o += x;
            }
        }
        Ok(self.record(out, &[a, bias], || Op::AddRow(a.clone(), bias.clone())))
    }

    pub fn mul(&mut self, a: &Var, b: &Var) -> Result<Var> {
        check_same(a, b, "mul")?;
        let data = a
            .value()
            .data()
            .iter()
            .zip(b.value().data())
            .map(|(x, y)| x * y)
            .collect();
        let out = Tensor::new(a.shape().to_vec(), data)?;
        Ok(self.record(out, &[a, b], || Op::Mul(a.clone(), b.clone())))
    }

    pub fn scale(&mut self, a: &Var, factor: f64) -> Var {
        let out = a.value().map(|x| x * factor);
        self.record(out, &[a], || Op::Scale(a.clone(), factor))
    }

    pub fn sigmoid(&mut self, a: &Var) -> Var {
        let out = a.value().map(sigmoid);
        self.record(out, &[a], || Op::Sigmoid(a.clone()))
    }

    pub fn tanh(&mut self, a: &Var) -> Var {
        let out = a.value().map(f64::tanh);
        self.record(out, &[a], || Op::Tanh(a.clone()))
    }

    pub fn relu(&mut self, a: &Var) -> Var {
        let out = a.value().map(|x| x.max(0.0));
        self.record(out, &[a], || Op::Relu(a.clone()))
    }

    pub fn concat_cols(&mut self, parts: &[Var]) -> Result<Var> {
        let rows = parts
            .first()
            .ok_or_else(|| Error::invalid("concat_cols of nothing"))?
            .value()
            .rows();
        if parts.iter().any(|p| p.value().rows() != rows) {
            return Err(Error::invalid("concat_cols: row counts differ"));
        }
        let cols: usize = parts.iter().map(|p| p.value().cols()).sum();
        let mut data = Vec::with_capacity(rows * cols);
        for r in 0..rows {
            for p in parts {
                data.extend_from_slice(p.value().row(r));
            }
        }
        let out = Tensor::matrix(rows, cols, data)?;
        let inputs: Vec<&Var> = parts.iter().collect();
        Ok(self.record(out, &inputs, || Op::ConcatCols(parts.to_vec())))
    }

    pub fn slice_cols(&mut self, a: &Var, start: usize, len: usize) -> Result<Var> {
        let t = a.value();
        if start + len > t.cols() {
            return Err(Error::invalid("slice_cols out of range"));
        }
        let mut data = Vec::with_capacity(t.rows() * len);
        for r in 0..t.rows() {
            data.extend_from_slice(&t.row(r)[start..start + len]);
        }
        let out = Tensor::matrix(t.rows(), len, data)?;
        Ok(self.record(out, &[a], || Op::SliceCols(a.clone(), start)))
    }

    pub fn concat_rows(&mut self, parts: &[Var]) -> Result<Var> {
        let cols = parts
            .first()
            .ok_or_else(|| Error::invalid("concat_rows of nothing"))?
            .value()
            .cols();
        if parts.iter().any(|p| p.value().cols() != cols) {
            return Err(Error::invalid("concat_rows: column counts differ"));
        }
        let rows: usize = parts.iter().map(|p| p.value().rows()).sum();
        let mut data = Vec::with_capacity(rows * cols);
        for p in parts {
            data.extend_from_slice(p.value().data());
        }
        let out = Tensor::matrix(rows, cols, data)?;
        let inputs: Vec<&Var> = parts.iter().collect();
        Ok(self.record(out, &inputs, || Op::ConcatRows(parts.to_vec())))
    }

    pub fn slice_rows(&mut self, a: &Var, start: usize, len: usize) -> Result<Var> {
        let t = a.value();
        if start + len > t.rows() {
            return Err(Error::invalid("slice_rows out of range"));
        }
        let c = t.cols();
        let out = Tensor::matrix(len, c, t.data()[start * c..(start + len) * c].to_vec())?;
        Ok(self.record(out, &[a], || Op::SliceRows(a.clone(), start)))
    }

    /// Row gather; also serves as embedding lookup.
    pub fn gather_rows(&mut self, a: &Var, indices: &[usize]) -> Result<Var> {
        let t = a.value();
        let c = t.cols();
        let mut data = Vec::with_capacity(indices.len() * c);
        for &i in indices {
            if i >= t.rows() {
                return Err(Error::contract(format!(
                    "row index {} out of range for {} rows",
                    i,
                    t.rows()
                )));
            }
            data.extend_from_slice(t.row(i));
        }
        let out = Tensor::matrix(indices.len(), c, data)?;
        Ok(self.record(out, &[a], || Op::GatherRows(a.clone(), indices.to_vec())))
    }

    /// Row-wise log-softmax. `-inf` entries stay `-inf`.
    pub fn log_softmax_rows(&mut self, a: &Var) -> Result<Var> {
        let t = a.value();
        if t.cols() == 0 {
            return Err(Error::invalid("log_softmax over empty rows"));
        }
        let mut out = Tensor::zeros(&[t.rows(), t.cols()]);
        for r in 0..t.rows() {
            log_softmax_into(t.row(r), out.row_mut(r));
        }
        Ok(self.record(out, &[a], || Op::LogSoftmaxRows(a.clone())))
    }

    /// Sum of `a[r, targets[r]]` over rows with a target.
    pub fn pick_sum(&mut self, a: &Var, targets: &[Option<usize>]) -> Result<Var> {
        let t = a.value();
        if targets.len() != t.rows() {
            return Err(Error::contract(format!(
                "{} targets for {} rows",
                targets.len(),
                t.rows()
            )));
        }
        let mut total = 0.0;
        for (r, target) in targets.iter().enumerate() {
            if let Some(c) = *target {
                if c >= t.cols() {
                    return Err(Error::contract(format!(
                        "target {} out of range for row of {}",
                        c,
                        t.cols()
                    )));
                }
                total += t.get2(r, c);
            }
        }
        Ok(self.record(Tensor::scalar(total), &[a], || {
            Op::PickSum(a.clone(), targets.to_vec())
        }))
    }

    pub fn sum(&mut self, a: &Var) -> Var {
        let total = a.value().sum();
        self.record(Tensor::scalar(total), &[a], || Op::Sum(a.clone()))
    }

    /// `Σ_r Σ_k p[r,k] (ln p[r,k] − logq[r,k])` over rows selected by `rows`;
    /// zero-probability entries contribute nothing.
    pub fn kl_rows(&mut self, p: &Tensor, logq: &Var, rows: &[bool]) -> Result<Var> {
        let q = logq.value();
        if p.rows() != q.rows() || p.cols() != q.cols() || rows.len() != q.rows() {
            return Err(Error::contract("kl_rows shape mismatch"));
        }
        let mut total = 0.0;
        for r in (0..q.rows()).filter(|&r| rows[r]) {
            for (pk, lq) in p.row(r).iter().zip(q.row(r)) {
                if *pk > 0.0 {
                    total += pk * (pk.ln() - lq);
                }
            }
        }
        let p = Arc::new(p.clone());
        Ok(self.record(Tensor::scalar(total), &[logq], || {
            Op::KlRows(p, logq.clone(), rows.to_vec())
        }))
    }

    /// For `p` of shape n×(G·d) and `h` of shape n×d, returns the n×G matrix
    /// `out[i,g] = Σ_b p[i, g·d + b] · h[i, b]`.
    pub fn row_group_dot(&mut self, p: &Var, h: &Var) -> Result<Var> {
        let (pt, ht) = (p.value(), h.value());
        let d = ht.cols();
        if pt.rows() != ht.rows() || d == 0 || pt.cols() % d != 0 {
            return Err(Error::invalid(format!(
                "row_group_dot shape mismatch {:?} / {:?}",
                pt.shape(),
                ht.shape()
            )));
        }
        let groups = pt.cols() / d;
        let mut out = Tensor::zeros(&[pt.rows(), groups]);
        for i in 0..pt.rows() {
            let (prow, hrow) = (pt.row(i), ht.row(i));
            for (g, o) in out.row_mut(i).iter_mut().enumerate() {
                *o = prow[g * d..(g + 1) * d]
                    .iter()
                    .zip(hrow)
                    .map(|(a, b)| a * b)
                    .sum();
            }
        }
        Ok(self.record(out, &[p, h], || Op::RowGroupDot(p.clone(), h.clone())))
    }

    /// Reverse pass from a scalar node.
    pub fn backward(&self, loss: &Var, params: &ParamSet) -> Result<Gradients> {
        if loss.value().len() != 1 {
            return Err(Error::contract(format!(
                "backward needs a scalar loss, got shape {:?}",
                loss.shape()
            )));
        }
        let mut param_grads: Vec<Tensor> = params
            .values
            .iter()
            .map(|v| Tensor::zeros(v.shape()))
            .collect();
        let Some(root) = loss.node else {
            return Ok(Gradients { grads: param_grads });
        };

        let mut grads: Vec<Option<Tensor>> = vec![None; root + 1];
        grads[root] = Some(Tensor::filled(loss.shape(), 1.0));

        for id in (0..=root).rev() {
            let Some(g) = grads[id].take() else {
                continue;
            };
            let node = &self.nodes[id];
            match &node.op {
                Op::Param(p) => {
                    if param_grads[p.0].len() != g.len() {
                        return Err(Error::contract(format!(
                            "parameter {} changed shape during backward",
                            params.name(*p)
                        )));
                    }
                    param_grads[p.0].add_assign(&g);
                }
                Op::MatMul(a, b) => {
                    let (m, k, n) = (a.value().rows(), a.value().cols(), b.value().cols());
                    if a.node.is_some() {
                        let mut da = Tensor::zeros(&[m, k]);
                        gemm(m, n, k, g.data(), false, b.value().data(), true, da.data_mut(), false);
                        accumulate(&mut grads, a, da);
                    }
                    if b.node.is_some() {
                        let mut db = Tensor::zeros(&[k, n]);
                        gemm(k, m, n, a.value().data(), true, g.data(), false, db.data_mut(), false);
                        accumulate(&mut grads, b, db);
                    }
                }
                Op::MatMulNt(a, b) => {
                    let (m, k, n) = (a.value().rows(), a.value().cols(), b.value().rows());
                    if a.node.is_some() {
                        let mut da = Tensor::zeros(&[m, k]);
                        gemm(m, n, k, g.data(), false, b.value().data(), false, da.data_mut(), false);
                        accumulate(&mut grads, a, da);
                    }
                    if b.node.is_some() {
                        let mut db = Tensor::zeros(&[n, k]);
                        gemm(n, m, k, g.data(), true, a.value().data(), false, db.data_mut(), false);
                        accumulate(&mut grads, b, db);
                    }
                }
                Op::Add(a, b) => {
                    if b.node.is_some() {
                        accumulate(&mut grads, b, reshaped(&g, b));
                    }
                    if a.node.is_some() {
                        accumulate(&mut grads, a, reshaped(&g, a));
                    }
                }
                Op::AddRow(a, bias) => {
                    if bias.node.is_some() {
                        let mut db = vec![0.0; g.cols()];
                        for r in 0..g.rows() {
                            for (d, x) in db.iter_mut().zip(g.row(r)) {
                                *d += x;
                            }
                        }
                        let db = Tensor::new(bias.shape().to_vec(), db)?;
                        accumulate(&mut grads, bias, db);
                    }
                    if a.node.is_some() {
                        accumulate(&mut grads, a, reshaped(&g, a));
                    }
                }
                Op::Mul(a, b) => {
                    if a.node.is_some() {
                        accumulate(&mut grads, a, zip_map(&g, b.value(), |g, y| g * y));
                    }
                    if b.node.is_some() {
                        accumulate(&mut grads, b, zip_map(&g, a.value(), |g, x| g * x));
                    }
                }
                Op::Scale(a, factor) => {
                    let f = *factor;
                    accumulate(&mut grads, a, g.map(|x| x * f));
                }
                Op::Sigmoid(a) => {
                    let da = zip_map(&g, &node.value, |g, y| g * y * (1.0 - y));
                    accumulate(&mut grads, a, da);
                }
                Op::Tanh(a) => {
                    let da = zip_map(&g, &node.value, |g, y| g * (1.0 - y * y));
                    accumulate(&mut grads, a, da);
                }
                Op::Relu(a) => {
                    let da = zip_map(&g, &node.value, |g, y| if y > 0.0 { g } else { 0.0 });
                    accumulate(&mut grads, a, da);
                }
                Op::ConcatCols(parts) => {
                    let mut start = 0;
                    for p in parts {
                        let c = p.value().cols();
                        if p.node.is_some() {
                            let mut data = Vec::with_capacity(g.rows() * c);
                            for r in 0..g.rows() {
                                data.extend_from_slice(&g.row(r)[start..start + c]);
                            }
                            accumulate(&mut grads, p, Tensor::new(p.shape().to_vec(), data)?);
                        }
                        start += c;
                    }
                }
                Op::SliceCols(a, start) => {
                    let mut da = Tensor::zeros(&[a.value().rows(), a.value().cols()]);
                    let len = g.cols();
                    for r in 0..g.rows() {
                        da.row_mut(r)[*start..*start + len].copy_from_slice(g.row(r));
                    }
                    accumulate(&mut grads, a, da.reshape(a.shape().to_vec())?);
                }
                Op::ConcatRows(parts) => {
                    let c = g.cols();
                    let mut start = 0;
                    for p in parts {
                        let n = p.value().len();
                        if p.node.is_some() {
                            let data = g.data()[start..start + n].to_vec();
                            accumulate(&mut grads, p, Tensor::new(p.shape().to_vec(), data)?);
                        }
                        start += n;
                        debug_assert_eq!(n % c.max(1), 0);
                    }
                }
                Op::SliceRows(a, start) => {
                    let mut da = Tensor::zeros(a.shape());
                    let c = g.cols();
                    da.data_mut()[start * c..start * c + g.len()].copy_from_slice(g.data());
                    accumulate(&mut grads, a, da);
                }
                Op::GatherRows(a, indices) => {
                    let mut da = Tensor::zeros(a.shape());
                    for (r, &i) in indices.iter().enumerate() {
                        for (d, x) in da.row_mut(i).iter_mut().zip(g.row(r)) {
                            *d += x;
                        }
                    }
                    accumulate(&mut grads, a, da);
                }
                Op::LogSoftmaxRows(a) => {
                    let y = &node.value;
                    let mut da = Tensor::zeros(a.shape());
                    for r in 0..y.rows() {
                        let gsum: f64 = g.row(r).iter().sum();
                        for ((d, gy), yv) in da.row_mut(r).iter_mut().zip(g.row(r)).zip(y.row(r)) {
                            *d = gy - yv.exp() * gsum;
                        }
                    }
                    accumulate(&mut grads, a, da);
                }
                Op::PickSum(a, targets) => {
                    let gv = g.item();
                    let mut da = Tensor::zeros(a.shape());
                    let c = a.value().cols();
                    for (r, target) in targets.iter().enumerate() {
                        if let Some(t) = target {
                            da.data_mut()[r * c + t] += gv;
                        }
                    }
                    accumulate(&mut grads, a, da);
                }
                Op::Sum(a) => {
                    accumulate(&mut grads, a, Tensor::filled(a.shape(), g.item()));
                }
                Op::KlRows(p, logq, rows) => {
                    let gv = g.item();
                    let mut dq = Tensor::zeros(logq.shape());
                    for r in (0..p.rows()).filter(|&r| rows[r]) {
                        for (d, pk) in dq.row_mut(r).iter_mut().zip(p.row(r)) {
                            *d = -gv * pk;
                        }
                    }
                    accumulate(&mut grads, logq, dq);
                }
                Op::RowGroupDot(p, h) => {
                    let (pt, ht) = (p.value(), h.value());
                    let d = ht.cols();
                    if p.node.is_some() {
                        let mut dp = Tensor::zeros(pt.shape());
                        for i in 0..pt.rows() {
                            let hrow = ht.row(i);
                            let grow = g.row(i);
                            for (gi, chunk) in dp.row_mut(i).chunks_mut(d).enumerate() {
                                for (o, hv) in chunk.iter_mut().zip(hrow) {
                                    *o = grow[gi] * hv;
                                }
                            }
                        }
                        accumulate(&mut grads, p, dp);
                    }
                    if h.node.is_some() {
                        let mut dh = Tensor::zeros(ht.shape());
                        for i in 0..pt.rows() {
                            let prow = pt.row(i);
                            let grow = g.row(i);
                            let dhrow = dh.row_mut(i);
                            for (gi, chunk) in prow.chunks(d).enumerate() {
                                for (o, pv) in dhrow.iter_mut().zip(chunk) {
                                    *o += grow[gi] * pv;
                                }
                            }
                        }
                        accumulate(&mut grads, h, dh);
                    }
                }
            }
        }
        Ok(Gradients { grads: param_grads })
    }
}

fn check_same(a: &Var, b: &Var, what: &str) -> Result<()> {
    if a.value().len() != b.value().len() {
        return Err(Error::invalid(format!(
            "{}: shapes {:?} and {:?} differ",
            what,
            a.shape(),
            b.shape()
        )));
    }
    Ok(())
}

fn accumulate(grads: &mut [Option<Tensor>], input: &Var, g: Tensor) {
    let Some(id) = input.node else {
        return;
    };
    match &mut grads[id] {
        Some(existing) => existing.add_assign(&g),
        slot => *slot = Some(g),
    }
}

fn reshaped(g: &Tensor, like: &Var) -> Tensor {
    Tensor::new(like.shape().to_vec(), g.data().to_vec()).expect("same element count")
}

fn zip_map(g: &Tensor, other: &Tensor, f: impl Fn(f64, f64) -> f64) -> Tensor {
    let data = g.data().iter().zip(other.data()).map(|(a, b)| f(*a, *b)).collect();
    Tensor::new(other.shape().to_vec(), data).expect("same element count")
}
