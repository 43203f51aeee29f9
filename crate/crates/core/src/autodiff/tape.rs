use super::tensor::Tensor;
use crate::error::{Error, Result};

/// Handle to a value recorded on a [`Tape`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Var(usize);

impl Var {
    pub fn index(self) -> usize {
        self.0
    }
}

#[derive(Debug)]
enum Op {
    Leaf,
    MatMul { a: Var, b: Var, m: usize, k: usize, n: usize },
    Add(Var, Var),
    Mul(Var, Var),
    Scale(Var, f32),
    Silu(Var),
    Sum(Var),
    RmsNorm { x: Var, gain: Var, inv_rms: Vec<f32> },
    Softmax(Var),
    CausalSoftmax(Var),
    Transpose(Var),
    SliceCols { x: Var, start: usize },
    ConcatCols(Vec<Var>),
    Rope { x: Var, n_heads: usize },
    Embed { table: Var, ids: Vec<usize> },
    CrossEntropy { logits: Var, targets: Vec<usize>, probs: Vec<f32> },
}

#[derive(Debug)]
struct Node {
    value: Tensor,
    op: Op,
    needs_grad: bool,
}

/// Records primitive applications in evaluation order and replays them in
/// reverse to accumulate gradients.
///
/// Nodes are appended only after their inputs, so the node vector is already
/// a topological order and backward is a single reverse sweep.
#[derive(Debug, Default)]
pub struct Tape {
    nodes: Vec<Node>,
    backward_done: bool,
}

const ROPE_BASE: f32 = 10_000.0;

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

    /// Records an input tensor; it receives a gradient iff `requires_grad` is set.
    pub fn leaf(&mut self, value: Tensor) -> Var {
        let needs_grad = value.requires_grad();
        self.nodes.push(Node {
            value,
            op: Op::Leaf,
            needs_grad,
        });
        Var(self.nodes.len() - 1)
    }

    pub fn param(&mut self, value: Tensor) -> Var {
        self.leaf(value.with_requires_grad(true))
    }

    pub fn constant(&mut self, value: Tensor) -> Var {
        self.leaf(value.with_requires_grad(false))
    }

    pub fn value(&self, v: Var) -> &Tensor {
        &self.nodes[v.0].value
    }

    /// Gradient of a `requires_grad` leaf after [`Tape::backward`].
    pub fn grad(&self, v: Var) -> Option<&[f32]> {
        self.nodes[v.0].value.grad()
    }

    /// Clears stored gradients so that `backward` may run again.
    pub fn reset_grads(&mut self) {
        for node in &mut self.nodes {
            node.value.set_grad(None);
        }
        self.backward_done = false;
    }

    fn push(&mut self, value: Tensor, op: Op, inputs: &[Var]) -> Result<Var> {
        if !value.all_finite() {
            return Err(Error::Numeric(format!(
                "output of {} (node {})",
                op_name(&op),
                self.nodes.len()
            )));
        }
        let needs_grad = inputs.iter().any(|v| self.nodes[v.0].needs_grad);
        self.nodes.push(Node {
            value,
            op,
            needs_grad,
        });
        Ok(Var(self.nodes.len() - 1))
    }

    fn same_shape(&self, a: Var, b: Var, what: &str) -> Result<()> {
        let (sa, sb) = (self.value(a).shape(), self.value(b).shape());
        if sa != sb {
            return Err(Error::Shape(format!("{what}: {sa:?} vs {sb:?}")));
        }
        Ok(())
    }

    pub fn matmul(&mut self, a: Var, b: Var) -> Result<Var> {
        let (m, k) = self.value(a).dims2()?;
        let (k2, n) = self.value(b).dims2()?;
        if k != k2 {
            return Err(Error::Shape(format!(
                "matmul: [{m}, {k}] x [{k2}, {n}]"
            )));
        }
        let mut out = vec![0.0; m * n];
        gemm(
            m,
            k,
            n,
            self.value(a).data(),
            (k, 1),
            self.value(b).data(),
            (n, 1),
            &mut out,
        );
        self.push(Tensor::matrix(m, n, out)?, Op::MatMul { a, b, m, k, n }, &[a, b])
    }

    pub fn add(&mut self, a: Var, b: Var) -> Result<Var> {
        self.same_shape(a, b, "add")?;
        let data = zip_map(self.value(a).data(), self.value(b).data(), |x, y| x + y);
        let shape = self.value(a).shape().to_vec();
        self.push(Tensor::new(shape, data)?, Op::Add(a, b), &[a, b])
    }

    /// Elementwise product.
    pub fn mul(&mut self, a: Var, b: Var) -> Result<Var> {
        self.same_shape(a, b, "mul")?;
        let data = zip_map(self.value(a).data(), self.value(b).data(), |x, y| x * y);
        let shape = self.value(a).shape().to_vec();
        self.push(Tensor::new(shape, data)?, Op::Mul(a, b), &[a, b])
    }

    pub fn scale(&mut self, a: Var, c: f32) -> Result<Var> {
        let x = self.value(a);
        let data = x.data().iter().map(|v| v * c).collect();
        let shape = x.shape().to_vec();
        self.push(Tensor::new(shape, data)?, Op::Scale(a, c), &[a])
    }

    pub fn silu(&mut self, a: Var) -> Result<Var> {
        let x = self.value(a);
        let data = x.data().iter().map(|&v| v * sigmoid(v)).collect();
        let shape = x.shape().to_vec();
        self.push(Tensor::new(shape, data)?, Op::Silu(a), &[a])
    }

    pub fn sum(&mut self, a: Var) -> Result<Var> {
        let s: f64 = self.value(a).data().iter().map(|&v| v as f64).sum();
        self.push(Tensor::scalar(s as f32), Op::Sum(a), &[a])
    }

    /// Row-wise `gain * x / sqrt(mean(x^2) + eps)` over the last dimension.
    pub fn rms_norm(&mut self, x: Var, gain: Var, eps: f32) -> Result<Var> {
        let xt = self.value(x);
        let (rows, d) = xt.rows_cols();
        let g = self.value(gain);
        if g.numel() != d || g.shape().len() != 1 {
            return Err(Error::Shape(format!(
                "rms_norm: input {:?} with gain {:?}",
                xt.shape(),
                g.shape()
            )));
        }
        if !(eps >= 0.0) {
            return Err(Error::Contract(format!("rms_norm eps must be >= 0, got {eps}")));
        }
        let mut out = vec![0.0; rows * d];
        let mut inv_rms = Vec::with_capacity(rows);
        for r in 0..rows {
            let row = &xt.data()[r * d..(r + 1) * d];
            let ms = row.iter().map(|&v| (v as f64) * (v as f64)).sum::<f64>() / d as f64;
            let denom = ms + eps as f64;
            if denom <= 0.0 {
                // All-zero row with eps = 0: the normalization is undefined.
                return Err(Error::Degenerate("rms_norm of an all-zero row with eps = 0".into()));
            }
            let inv = (1.0 / denom.sqrt()) as f32;
            inv_rms.push(inv);
            for ((o, &v), &gv) in out[r * d..(r + 1) * d].iter_mut().zip(row).zip(g.data()) {
                *o = gv * v * inv;
            }
        }
        let shape = xt.shape().to_vec();
        self.push(Tensor::new(shape, out)?, Op::RmsNorm { x, gain, inv_rms }, &[x, gain])
    }

    /// Softmax over the last dimension, computed with max subtraction.
    pub fn softmax_rows(&mut self, x: Var) -> Result<Var> {
        let xt = self.value(x);
        let (rows, n) = xt.rows_cols();
        let mut out = xt.data().to_vec();
        for r in 0..rows {
            softmax_in_place(&mut out[r * n..(r + 1) * n]);
        }
        let shape = xt.shape().to_vec();
        self.push(Tensor::new(shape, out)?, Op::Softmax(x), &[x])
    }

    /// Softmax of a square score matrix where row `i` only sees columns `<= i`.
    /// Masked entries are exactly zero.
    pub fn causal_softmax(&mut self, x: Var) -> Result<Var> {
        let (rows, cols) = self.value(x).dims2()?;
        if rows != cols {
            return Err(Error::Shape(format!(
                "causal_softmax needs a square matrix, got [{rows}, {cols}]"
            )));
        }
        let src = self.value(x).data();
        let mut out = vec![0.0; rows * cols];
        for r in 0..rows {
            let row = &mut out[r * cols..r * cols + r + 1];
            row.copy_from_slice(&src[r * cols..r * cols + r + 1]);
            softmax_in_place(row);
        }
        self.push(Tensor::matrix(rows, cols, out)?, Op::CausalSoftmax(x), &[x])
    }

    pub fn transpose(&mut self, x: Var) -> Result<Var> {
        let (r, c) = self.value(x).dims2()?;
        let src = self.value(x).data();
        let mut out = vec![0.0; r * c];
        for i in 0..r {
            for j in 0..c {
                out[j * r + i] = src[i * c + j];
            }
        }
        self.push(Tensor::matrix(c, r, out)?, Op::Transpose(x), &[x])
    }

    /// Columns `start..start + len` of a 2-D tensor.
    pub fn slice_cols(&mut self, x: Var, start: usize, len: usize) -> Result<Var> {
        let (r, c) = self.value(x).dims2()?;
        if start + len > c {
            return Err(Error::Index(format!(
                "slice_cols {start}..{} of {c} columns",
                start + len
            )));
        }
        let src = self.value(x).data();
        let mut out = Vec::with_capacity(r * len);
        for i in 0..r {
            out.extend_from_slice(&src[i * c + start..i * c + start + len]);
        }
        self.push(Tensor::matrix(r, len, out)?, Op::SliceCols { x, start }, &[x])
    }

    pub fn concat_cols(&mut self, parts: &[Var]) -> Result<Var> {
        let Some(&first) = parts.first() else {
            return Err(Error::Contract("concat_cols of zero tensors".into()));
        };
        let (rows, _) = self.value(first).dims2()?;
        let mut widths = Vec::with_capacity(parts.len());
        for &p in parts {
            let (r, c) = self.value(p).dims2()?;
            if r != rows {
                return Err(Error::Shape(format!("concat_cols: {r} rows vs {rows}")));
            }
            widths.push(c);
        }
        let total: usize = widths.iter().sum();
        let mut out = Vec::with_capacity(rows * total);
        for i in 0..rows {
            for (&p, &w) in parts.iter().zip(&widths) {
                out.extend_from_slice(&self.value(p).data()[i * w..(i + 1) * w]);
            }
        }
        self.push(
            Tensor::matrix(rows, total, out)?,
            Op::ConcatCols(parts.to_vec()),
            parts,
        )
    }

    /// Rotary position embedding applied per head; row index is the position.
    /// Adjacent pairs `(2p, 2p + 1)` inside each head are rotated by
    /// `pos * base^(-2p / head_dim)`. An odd trailing dimension passes through.
    pub fn rope(&mut self, x: Var, n_heads: usize) -> Result<Var> {
        let (rows, d) = self.value(x).dims2()?;
        if n_heads == 0 || d % n_heads != 0 {
            return Err(Error::Shape(format!("rope: width {d} not divisible by {n_heads} heads")));
        }
        let mut out = self.value(x).data().to_vec();
        rope_apply(&mut out, rows, d, n_heads, false);
        self.push(Tensor::matrix(rows, d, out)?, Op::Rope { x, n_heads }, &[x])
    }

    /// Gathers rows of `table` (shape `[vocab, d]`).
    pub fn embed(&mut self, table: Var, ids: &[usize]) -> Result<Var> {
        let (vocab, d) = self.value(table).dims2()?;
        let src = self.value(table).data();
        let mut out = Vec::with_capacity(ids.len() * d);
        for &id in ids {
            if id >= vocab {
                return Err(Error::Index(format!("token id {id} >= vocabulary size {vocab}")));
            }
            out.extend_from_slice(&src[id * d..(id + 1) * d]);
        }
        self.push(
            Tensor::matrix(ids.len(), d, out)?,
            Op::Embed { table, ids: ids.to_vec() },
            &[table],
        )
    }

    /// Mean over rows of `-log softmax(logits)[target]`.
    pub fn cross_entropy(&mut self, logits: Var, targets: &[usize]) -> Result<Var> {
        let (t, vocab) = self.value(logits).dims2()?;
        if targets.len() != t {
            return Err(Error::Shape(format!(
                "cross_entropy: {t} logit rows but {} targets",
                targets.len()
            )));
        }
        if t == 0 {
            return Err(Error::Contract("cross_entropy over zero positions".into()));
        }
        if let Some(&bad) = targets.iter().find(|&&id| id >= vocab) {
            return Err(Error::Index(format!("target id {bad} >= vocabulary size {vocab}")));
        }
        let mut probs = self.value(logits).data().to_vec();
        let mut total = 0.0f64;
        for (r, &target) in targets.iter().enumerate() {
            let row = &mut probs[r * vocab..(r + 1) * vocab];
            let max = row.iter().copied().fold(f32::NEG_INFINITY, f32::max);
            let lse = row.iter().map(|&v| ((v - max) as f64).exp()).sum::<f64>().ln();
            total += lse - (row[target] - max) as f64;
            softmax_in_place(row);
        }
        let loss = (total / t as f64) as f32;
        self.push(
            Tensor::scalar(loss),
            Op::CrossEntropy { logits, targets: targets.to_vec(), probs },
            &[logits],
        )
    }

    /// Reverse sweep from a scalar `loss`, storing gradients on every
    /// `requires_grad` leaf that `loss` depends on.
    pub fn backward(&mut self, loss: Var) -> Result<()> {
        if self.backward_done {
            return Err(Error::Contract(
                "backward called twice without reset_grads".into(),
            ));
        }
        if !self.value(loss).is_scalar() {
            return Err(Error::Contract(format!(
                "backward on non-scalar of shape {:?}",
                self.value(loss).shape()
            )));
        }
        let mut grads: Vec<Option<Vec<f32>>> = Vec::new();
        grads.resize_with(loss.0 + 1, || None);
        grads[loss.0] = Some(vec![1.0]);

        for idx in (0..=loss.0).rev() {
            let Some(g) = grads[idx].take() else { continue };
            let node = &self.nodes[idx];
            if !node.needs_grad {
                continue;
            }
            if let Op::Leaf = node.op {
                grads[idx] = Some(g);
                continue;
            }
            self.propagate(idx, &g, &mut grads)?;
        }

        for (idx, g) in grads.into_iter().enumerate() {
            let node = &mut self.nodes[idx];
            if matches!(node.op, Op::Leaf) && node.value.requires_grad() {
                if let Some(g) = &g {
                    if let Some(bad) = g.iter().position(|v| !v.is_finite()) {
                        return Err(Error::Numeric(format!(
                            "gradient of leaf {idx} at element {bad}"
                        )));
                    }
                }
                node.value.set_grad(g);
            }
        }
        self.backward_done = true;
        Ok(())
    }

    fn propagate(&self, idx: usize, g: &[f32], grads: &mut [Option<Vec<f32>>]) -> Result<()> {
        let nodes = &self.nodes;
        let out = &nodes[idx].value;
        match &nodes[idx].op {
            Op::Leaf => {}
            &Op::MatMul { a, b, m, k, n } => {
                if let Some(ga) = slot(nodes, grads, a) {
                    // dA = G * B^T
                    gemm(m, n, k, g, (n, 1), nodes[b.0].value.data(), (1, n), ga);
                }
                if let Some(gb) = slot(nodes, grads, b) {
                    // dB = A^T * G
                    gemm(k, m, n, nodes[a.0].value.data(), (1, k), g, (n, 1), gb);
                }
            }
            &Op::Add(a, b) => {
                for v in [a, b] {
                    if let Some(gv) = slot(nodes, grads, v) {
                        add_into(gv, g);
                    }
                }
            }
            &Op::Mul(a, b) => {
                if let Some(ga) = slot(nodes, grads, a) {
                    for ((o, &gi), &bi) in ga.iter_mut().zip(g).zip(nodes[b.0].value.data()) {
                        *o += gi * bi;
                    }
                }
                if let Some(gb) = slot(nodes, grads, b) {
                    for ((o, &gi), &ai) in gb.iter_mut().zip(g).zip(nodes[a.0].value.data()) {
                        *o += gi * ai;
                    }
                }
            }
            &Op::Scale(a, c) => {
                if let Some(ga) = slot(nodes, grads, a) {
                    for (o, &gi) in ga.iter_mut().zip(g) {
                        *o += c * gi;
                    }
                }
            }
            &Op::Silu(a) => {
                if let Some(ga) = slot(nodes, grads, a) {
                    for ((o, &gi), &x) in ga.iter_mut().zip(g).zip(nodes[a.0].value.data()) {
                        let s = sigmoid(x);
                        *o += gi * s * (1.0 + x * (1.0 - s));
                    }
                }
            }
            &Op::Sum(a) => {
                if let Some(ga) = slot(nodes, grads, a) {
                    let g0 = g[0];
                    ga.iter_mut().for_each(|o| *o += g0);
                }
            }
            Op::RmsNorm { x, gain, inv_rms } => {
                let (x, gain) = (*x, *gain);
                let xv = nodes[x.0].value.data();
                let gainv = nodes[gain.0].value.data();
                let d = gainv.len();
                if let Some(gg) = slot(nodes, grads, gain) {
                    for (r, &inv) in inv_rms.iter().enumerate() {
                        let row = &xv[r * d..(r + 1) * d];
                        let grow = &g[r * d..(r + 1) * d];
                        for ((o, &xi), &gi) in gg.iter_mut().zip(row).zip(grow) {
                            *o += gi * xi * inv;
                        }
                    }
                }
                if let Some(gx) = slot(nodes, grads, x) {
                    for (r, &inv) in inv_rms.iter().enumerate() {
                        let row = &xv[r * d..(r + 1) * d];
                        let grow = &g[r * d..(r + 1) * d];
                        let dot: f64 = row
                            .iter()
                            .zip(grow)
                            .zip(gainv)
                            .map(|((&xi, &gi), &wi)| (xi * gi * wi) as f64)
                            .sum();
                        let coef = (dot / d as f64) as f32 * inv * inv * inv;
                        for (((o, &xi), &gi), &wi) in
                            gx[r * d..(r + 1) * d].iter_mut().zip(row).zip(grow).zip(gainv)
                        {
                            *o += gi * wi * inv - coef * xi;
                        }
                    }
                }
            }
            &Op::Softmax(a) | &Op::CausalSoftmax(a) => {
                if let Some(ga) = slot(nodes, grads, a) {
                    let (rows, n) = out.rows_cols();
                    let y = out.data();
                    for r in 0..rows {
                        let yr = &y[r * n..(r + 1) * n];
                        let gr = &g[r * n..(r + 1) * n];
                        let dot: f32 = yr.iter().zip(gr).map(|(a, b)| a * b).sum();
                        for ((o, &yi), &gi) in ga[r * n..(r + 1) * n].iter_mut().zip(yr).zip(gr) {
                            *o += yi * (gi - dot);
                        }
                    }
                }
            }
            &Op::Transpose(a) => {
                if let Some(ga) = slot(nodes, grads, a) {
                    let (r, c) = (out.shape()[1], out.shape()[0]);
                    for i in 0..r {
                        for j in 0..c {
                            ga[i * c + j] += g[j * r + i];
                        }
                    }
                }
            }
            &Op::SliceCols { x, start } => {
                if let Some(gx) = slot(nodes, grads, x) {
                    let (rows, len) = (out.shape()[0], out.shape()[1]);
                    let c = nodes[x.0].value.shape()[1];
                    for i in 0..rows {
                        add_into(&mut gx[i * c + start..i * c + start + len], &g[i * len..(i + 1) * len]);
                    }
                }
            }
            Op::ConcatCols(parts) => {
                let (rows, total) = (out.shape()[0], out.shape()[1]);
                let mut offset = 0;
                for &p in parts {
                    let w = nodes[p.0].value.shape()[1];
                    if let Some(gp) = slot(nodes, grads, p) {
                        for i in 0..rows {
                            add_into(
                                &mut gp[i * w..(i + 1) * w],
                                &g[i * total + offset..i * total + offset + w],
                            );
                        }
                    }
                    offset += w;
                }
            }
            &Op::Rope { x, n_heads } => {
                if let Some(gx) = slot(nodes, grads, x) {
                    let (rows, d) = (out.shape()[0], out.shape()[1]);
                    let mut back = g.to_vec();
                    rope_apply(&mut back, rows, d, n_heads, true);
                    add_into(gx, &back);
                }
            }
            Op::Embed { table, ids } => {
                if let Some(gt) = slot(nodes, grads, *table) {
                    let d = out.shape()[1];
                    for (r, &id) in ids.iter().enumerate() {
                        add_into(&mut gt[id * d..(id + 1) * d], &g[r * d..(r + 1) * d]);
                    }
                }
            }
            Op::CrossEntropy { logits, targets, probs } => {
                if let Some(gl) = slot(nodes, grads, *logits) {
                    let t = targets.len();
                    let vocab = probs.len() / t;
                    let scale = g[0] / t as f32;
                    for (r, &target) in targets.iter().enumerate() {
                        let row = &mut gl[r * vocab..(r + 1) * vocab];
                        for (o, &p) in row.iter_mut().zip(&probs[r * vocab..(r + 1) * vocab]) {
                            *o += scale * p;
                        }
                        row[target] -= scale;
                    }
                }
            }
        }
        Ok(())
    }
}

fn slot<'a>(nodes: &[Node], grads: &'a mut [Option<Vec<f32>>], v: Var) -> Option<&'a mut Vec<f32>> {
    let node = &nodes[v.0];
    if !node.needs_grad {
        return None;
    }
    Some(grads[v.0].get_or_insert_with(|| vec![0.0; node.value.numel()]))
}

fn op_name(op: &Op) -> &'static str {
    match op {
        Op::Leaf => "leaf",
        Op::MatMul { .. } => "matmul",
        Op::Add(..) => "add",
        Op::Mul(..) => "mul",
        Op::Scale(..) => "scale",
        Op::Silu(_) => "silu",
        Op::Sum(_) => "sum",
        Op::RmsNorm { .. } => "rms_norm",
        Op::Softmax(_) => "softmax_rows",
        Op::CausalSoftmax(_) => "causal_softmax",
        Op::Transpose(_) => "transpose",
        Op::SliceCols { .. } => "slice_cols",
        Op::ConcatCols(_) => "concat_cols",
        Op::Rope { .. } => "rope",
        Op::Embed { .. } => "embed",
        Op::CrossEntropy { .. } => "cross_entropy",
    }
}

fn sigmoid(x: f32) -> f32 {
    1.0 / (1.0 + (-x).exp())
}

fn zip_map(a: &[f32], b: &[f32], f: impl Fn(f32, f32) -> f32) -> Vec<f32> {
    a.iter().zip(b).map(|(&x, &y)| f(x, y)).collect()
}

fn add_into(dst: &mut [f32], src: &[f32]) {
    for (d, &s) in dst.iter_mut().zip(src) {
        *d += s;
    }
}

pub(crate) fn softmax_in_place(row: &mut [f32]) {
    let max = row.iter().copied().fold(f32::NEG_INFINITY, f32::max);
    let mut sum = 0.0f32;
    for v in row.iter_mut() {
        *v = (*v - max).exp();
        sum += *v;
    }
    let inv = 1.0 / sum;
    row.iter_mut().for_each(|v| *v *= inv);
}

/// Rotates (or with `inverse`, un-rotates) pairs in place.
fn rope_apply(data: &mut [f32], rows: usize, d: usize, n_heads: usize, inverse: bool) {
    let head_dim = d / n_heads;
    let pairs = head_dim / 2;
    let freqs: Vec<f32> = (0..pairs)
        .map(|p| ROPE_BASE.powf(-((2 * p) as f32) / head_dim as f32))
        .collect();
    for pos in 0..rows {
        for (p, &freq) in freqs.iter().enumerate() {
            let (sin, cos) = (pos as f32 * freq).sin_cos();
            let sin = if inverse { -sin } else { sin };
            for h in 0..n_heads {
                let i = pos * d + h * head_dim + 2 * p;
                let (x0, x1) = (data[i], data[i + 1]);
                data[i] = x0 * cos - x1 * sin;
                data[i + 1] = x0 * sin + x1 * cos;
            }
        }
    }
}

/// `c += A * B` for row-major `c` of shape `[m, n]`; `A` is `[m, k]` and `B` is
/// `[k, n]`, each addressed through `(row_stride, col_stride)`.
#[allow(clippy::too_many_arguments)]
pub(crate) fn gemm(
    m: usize,
    k: usize,
    n: usize,
    a: &[f32],
    a_strides: (usize, usize),
    b: &[f32],
    b_strides: (usize, usize),
    c: &mut [f32],
) {
    assert!(a.len() >= m * k && b.len() >= k * n && c.len() >= m * n);
    if m == 0 || n == 0 {
        return;
    }
    // SAFETY: the slices cover every element addressed by the given
    // dimensions and strides (checked above), and `c` does not alias `a`/`b`.
    unsafe {
        matrixmultiply::sgemm(
            m,
            k,
            n,
            1.0,
            a.as_ptr(),
            a_strides.0 as isize,
            a_strides.1 as isize,
            b.as_ptr(),
            b_strides.0 as isize,
            b_strides.1 as isize,
            1.0,
            c.as_mut_ptr(),
            n as isize,
            1,
        );
    }
}
