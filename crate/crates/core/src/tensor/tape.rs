use super::kernels::{self, ConvDims, SpectralDims};
use super::Tensor;
use crate::error::{Error, Result};

/// Handle to a node recorded on a [`Tape`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Var(usize);

impl Var {
    pub fn index(self) -> usize {
        self.0
    }
}

/// Operation kinds that can be recorded.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum OpKind {
    Add,
    Sub,
    Mul,
    MatMul,
    Conv2d,
    Reshape,
    ReduceMean,
    Relu,
    Sigmoid,
    Sine,
    Scale,
    Transpose,
    SpectralConv2d,
}

impl OpKind {
    pub fn name(self) -> &'static str {
        match self {
            OpKind::Add => "add",
            OpKind::Sub => "sub",
            OpKind::Mul => "mul",
            OpKind::MatMul => "matmul",
            OpKind::Conv2d => "conv2d",
            OpKind::Reshape => "reshape",
            OpKind::ReduceMean => "reduce_mean",
            OpKind::Relu => "relu",
            OpKind::Sigmoid => "sigmoid",
            OpKind::Sine => "sine",
            OpKind::Scale => "scale",
            OpKind::Transpose => "transpose",
            OpKind::SpectralConv2d => "spectral_conv2d",
        }
    }
}

#[derive(Debug)]
enum Op {
    Leaf,
    Add(Var, Var),
    Sub(Var, Var),
    Mul(Var, Var),
    Scale(Var, f64),
    MatMul(Var, Var),
    Transpose(Var),
    Conv2d(Var, Var, ConvDims),
    Reshape(Var),
    Mean(Var),
    Relu(Var),
    Sigmoid(Var),
    Sine(Var),
    Spectral(Var, Var, Var, SpectralDims),
}

#[derive(Debug)]
struct Node {
    value: Tensor,
    op: Op,
    needs_grad: bool,
    finite: bool,
}

/// Records a forward computation for one backward pass.
///
/// Nodes are appended in evaluation order, so every node's inputs precede it.
/// A tape is single-owner and is meant to be dropped after its gradients
/// have been consumed.
#[derive(Debug, Default)]
pub struct Tape {
    nodes: Vec<Node>,
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

    /// Records a differentiable input.
    pub fn leaf(&mut self, value: Tensor) -> Var {
        self.push_leaf(value, true)
    }

    /// Records an input that never needs a gradient (data, frozen statistics).
    pub fn constant(&mut self, value: Tensor) -> Var {
        self.push_leaf(value, false)
    }

    fn push_leaf(&mut self, value: Tensor, needs_grad: bool) -> Var {
        let finite = value.is_finite();
        self.nodes.push(Node {
            value,
            op: Op::Leaf,
            needs_grad,
            finite,
        });
        Var(self.nodes.len() - 1)
    }

    pub fn value(&self, v: Var) -> &Tensor {
        &self.nodes[v.0].value
    }

    pub fn shape(&self, v: Var) -> &[usize] {
        self.nodes[v.0].value.shape()
    }

    fn push(&mut self, value: Tensor, op: Op, inputs: &[Var]) -> Var {
        let needs_grad = inputs.iter().any(|v| self.nodes[v.0].needs_grad);
        let finite = value.is_finite();
        self.nodes.push(Node {
            value,
            op,
            needs_grad,
            finite,
        });
        Var(self.nodes.len() - 1)
    }

    fn check_finite(&self, kind: OpKind, inputs: &[Var]) -> Result<()> {
        if inputs.iter().all(|v| self.nodes[v.0].finite) {
            Ok(())
        } else {
            Err(Error::NonFinite { op: kind.name() })
        }
    }

    fn mismatch(&self, kind: OpKind, a: Var, b: Var) -> Error {
        Error::Shape {
            op: kind.name(),
            lhs: self.shape(a).to_vec(),
            rhs: self.shape(b).to_vec(),
        }
    }

    fn elementwise(&mut self, kind: OpKind, a: Var, b: Var, f: impl Fn(f64, f64) -> f64) -> Result<Var> {
        self.check_finite(kind, &[a, b])?;
        let (ta, tb) = (self.value(a), self.value(b));
        let out_shape = kernels::broadcast_shape(ta.shape(), tb.shape())
            .ok_or_else(|| self.mismatch(kind, a, b))?;
        let data = kernels::binary(ta.data(), ta.shape(), tb.data(), tb.shape(), &out_shape, f);
        let value = Tensor::new(&out_shape, data)?;
        let op = match kind {
            OpKind::Add => Op::Add(a, b),
            OpKind::Sub => Op::Sub(a, b),
            _ => Op::Mul(a, b),
        };
        Ok(self.push(value, op, &[a, b]))
    }

    /// Element-wise sum with broadcasting.
    pub fn add(&mut self, a: Var, b: Var) -> Result<Var> {
        self.elementwise(OpKind::Add, a, b, |x, y| x + y)
    }

    pub fn sub(&mut self, a: Var, b: Var) -> Result<Var> {
        self.elementwise(OpKind::Sub, a, b, |x, y| x - y)
    }

    pub fn mul(&mut self, a: Var, b: Var) -> Result<Var> {
        self.elementwise(OpKind::Mul, a, b, |x, y| x * y)
    }

    pub fn scale(&mut self, a: Var, c: f64) -> Result<Var> {
        self.check_finite(OpKind::Scale, &[a])?;
        let value = self.value(a).map(|x| x * c);
        Ok(self.push(value, Op::Scale(a, c), &[a]))
    }

    /// `[m, k] × [k, n] → [m, n]`.
    pub fn matmul(&mut self, a: Var, b: Var) -> Result<Var> {
        self.check_finite(OpKind::MatMul, &[a, b])?;
        let (sa, sb) = (self.shape(a), self.shape(b));
        if sa.len() != 2 || sb.len() != 2 || sa[1] != sb[0] {
            return Err(self.mismatch(OpKind::MatMul, a, b));
        }
        let (m, k, n) = (sa[0], sa[1], sb[1]);
        let mut out = vec![0.0; m * n];
        kernels::matmul(self.value(a).data(), self.value(b).data(), m, k, n, false, false, &mut out, false);
        let value = Tensor::new(&[m, n], out)?;
        Ok(self.push(value, Op::MatMul(a, b), &[a, b]))
    }

    pub fn transpose(&mut self, a: Var) -> Result<Var> {
        self.check_finite(OpKind::Transpose, &[a])?;
        let s = self.shape(a);
        if s.len() != 2 {
            return Err(Error::Shape {
                op: OpKind::Transpose.name(),
                lhs: s.to_vec(),
                rhs: vec![],
            });
        }
        let (r, c) = (s[0], s[1]);
        let value = Tensor::new(&[c, r], kernels::transpose(self.value(a).data(), r, c))?;
        Ok(self.push(value, Op::Transpose(a), &[a]))
    }

    /// Stride-1 convolution with zero padding that preserves the spatial size.
    /// `x: [batch, c_in, h, w]`, `kernel: [c_out, c_in, kh, kw]` with odd kh, kw.
    pub fn conv2d(&mut self, x: Var, kernel: Var) -> Result<Var> {
        self.check_finite(OpKind::Conv2d, &[x, kernel])?;
        let (sx, sk) = (self.shape(x), self.shape(kernel));
        if sx.len() != 4 || sk.len() != 4 || sx[1] != sk[1] || sk[2] % 2 == 0 || sk[3] % 2 == 0 {
            return Err(self.mismatch(OpKind::Conv2d, x, kernel));
        }
        let d = ConvDims {
            batch: sx[0],
            c_in: sx[1],
            c_out: sk[0],
            h: sx[2],
            w: sx[3],
            kh: sk[2],
            kw: sk[3],
        };
        let out = kernels::conv2d_forward(self.value(x).data(), self.value(kernel).data(), &d);
        let value = Tensor::new(&[d.batch, d.c_out, d.h, d.w], out)?;
        Ok(self.push(value, Op::Conv2d(x, kernel, d), &[x, kernel]))
    }

    /// Truncated Fourier-space channel mixing: `Re(F⁻¹(R·F(x)))` with `R`
    /// applied on the retained modes `-modes..modes` of both axes.
    /// `x: [batch, c_in, h, w]`, weights `[2·modes, 2·modes, c_in, c_out]`.
    pub fn spectral_conv2d(&mut self, x: Var, w_re: Var, w_im: Var, modes: usize) -> Result<Var> {
        let kind = OpKind::SpectralConv2d;
        self.check_finite(kind, &[x, w_re, w_im])?;
        let (sx, sw) = (self.shape(x), self.shape(w_re));
        let kept = 2 * modes;
        if sx.len() != 4
            || sw.len() != 4
            || self.shape(w_im) != sw
            || modes == 0
            || sw[0] != kept
            || sw[1] != kept
            || sw[2] != sx[1]
            || kept > sx[2]
            || kept > sx[3]
        {
            return Err(self.mismatch(kind, x, w_re));
        }
        for &e in &sx[2..] {
            if !e.is_power_of_two() || e < 2 {
                return Err(Error::NotPowerOfTwo { extent: e });
            }
        }
        let d = SpectralDims {
            batch: sx[0],
            c_in: sx[1],
            c_out: sw[3],
            h: sx[2],
            w: sx[3],
            modes,
        };
        let out = kernels::spectral_forward(
            self.value(x).data(),
            self.value(w_re).data(),
            self.value(w_im).data(),
            &d,
        );
        let value = Tensor::new(&[d.batch, d.c_out, d.h, d.w], out)?;
        Ok(self.push(value, Op::Spectral(x, w_re, w_im, d), &[x, w_re, w_im]))
    }

    pub fn reshape(&mut self, a: Var, shape: &[usize]) -> Result<Var> {
        self.check_finite(OpKind::Reshape, &[a])?;
        let n: usize = shape.iter().product();
        if n != self.value(a).len() {
            return Err(Error::Shape {
                op: OpKind::Reshape.name(),
                lhs: self.shape(a).to_vec(),
                rhs: shape.to_vec(),
            });
        }
        let value = self.value(a).reshape(shape)?;
        Ok(self.push(value, Op::Reshape(a), &[a]))
    }

    /// Mean over all elements, producing a scalar.
    pub fn reduce_mean(&mut self, a: Var) -> Result<Var> {
        self.check_finite(OpKind::ReduceMean, &[a])?;
        let t = self.value(a);
        let mean = t.data().iter().sum::<f64>() / t.len() as f64;
        Ok(self.push(Tensor::scalar(mean), Op::Mean(a), &[a]))
    }

    pub fn relu(&mut self, a: Var) -> Result<Var> {
        self.check_finite(OpKind::Relu, &[a])?;
        let value = self.value(a).map(|x| x.max(0.0));
        Ok(self.push(value, Op::Relu(a), &[a]))
    }

    pub fn sigmoid(&mut self, a: Var) -> Result<Var> {
        self.check_finite(OpKind::Sigmoid, &[a])?;
        let value = self.value(a).map(sigmoid);
        Ok(self.push(value, Op::Sigmoid(a), &[a]))
    }

    pub fn sine(&mut self, a: Var) -> Result<Var> {
        self.check_finite(OpKind::Sine, &[a])?;
        let value = self.value(a).map(f64::sin);
        Ok(self.push(value, Op::Sine(a), &[a]))
    }

    /// Mean squared difference between `a` and a target of the same shape.
    pub fn mse(&mut self, a: Var, target: Var) -> Result<Var> {
        let d = self.sub(a, target)?;
        let sq = self.mul(d, d)?;
        self.reduce_mean(sq)
    }

    /// Reverse sweep from a scalar `loss`.
    pub fn backward(&self, loss: Var) -> Result<Gradients> {
        if self.nodes.is_empty() {
            return Err(Error::invalid("backward on an empty tape"));
        }
        let ls = self.shape(loss);
        if !ls.is_empty() {
            return Err(Error::NotScalar { shape: ls.to_vec() });
        }
        let mut grads: Vec<Option<Vec<f64>>> = (0..self.nodes.len()).map(|_| None).collect();
        grads[loss.0] = Some(vec![1.0]);

        for id in (0..=loss.0).rev() {
            let Some(g) = grads[id].take() else { continue };
            let node = &self.nodes[id];
            if !node.needs_grad {
                grads[id] = Some(g);
                continue;
            }
            let out_shape = node.value.shape();
            let mut contribs: Vec<(Var, Vec<f64>)> = Vec::with_capacity(3);
            match node.op {
                Op::Leaf => {}
                Op::Add(a, b) | Op::Sub(a, b) => {
                    let neg = matches!(node.op, Op::Sub(..));
                    if self.nodes[a.0].needs_grad {
                        contribs.push((a, kernels::reduce_to(&g, out_shape, self.shape(a))));
                    }
                    if self.nodes[b.0].needs_grad {
                        let mut gb = kernels::reduce_to(&g, out_shape, self.shape(b));
                        if neg {
                            gb.iter_mut().for_each(|v| *v = -*v);
                        }
                        contribs.push((b, gb));
                    }
                }
                Op::Mul(a, b) => {
                    let (ta, tb) = (self.value(a), self.value(b));
                    if self.nodes[a.0].needs_grad {
                        let full = kernels::binary(&g, out_shape, tb.data(), tb.shape(), out_shape, |x, y| x * y);
                        contribs.push((a, kernels::reduce_to(&full, out_shape, ta.shape())));
                    }
                    if self.nodes[b.0].needs_grad {
                        let full = kernels::binary(&g, out_shape, ta.data(), ta.shape(), out_shape, |x, y| x * y);
                        contribs.push((b, kernels::reduce_to(&full, out_shape, tb.shape())));
                    }
                }
                Op::Scale(a, c) => contribs.push((a, g.iter().map(|v| v * c).collect())),
                Op::MatMul(a, b) => {
                    let (ta, tb) = (self.value(a), self.value(b));
                    let (m, k, n) = (ta.shape()[0], ta.shape()[1], tb.shape()[1]);
                    if self.nodes[a.0].needs_grad {
                        let mut ga = vec![0.0; m * k];
                        kernels::matmul(&g, tb.data(), m, n, k, false, true, &mut ga, false);
                        contribs.push((a, ga));
                    }
                    if self.nodes[b.0].needs_grad {
                        let mut gb = vec![0.0; k * n];
                        kernels::matmul(ta.data(), &g, k, m, n, true, false, &mut gb, false);
                        contribs.push((b, gb));
                    }
                }
                Op::Transpose(a) => {
                    let s = out_shape;
                    contribs.push((a, kernels::transpose(&g, s[0], s[1])));
                }
                Op::Conv2d(x, k, d) => {
                    let need_x = self.nodes[x.0].needs_grad;
                    let (gx, gk) =
                        kernels::conv2d_backward(self.value(x).data(), self.value(k).data(), &g, &d, need_x);
                    if let Some(gx) = gx {
                        contribs.push((x, gx));
                    }
                    if self.nodes[k.0].needs_grad {
                        contribs.push((k, gk));
                    }
                }
                Op::Spectral(x, wr, wi, d) => {
                    let need_x = self.nodes[x.0].needs_grad;
                    let (gx, gre, gim) = kernels::spectral_backward(
                        self.value(x).data(),
                        self.value(wr).data(),
                        self.value(wi).data(),
                        &g,
                        &d,
                        need_x,
                    );
                    if let Some(gx) = gx {
                        contribs.push((x, gx));
                    }
                    if self.nodes[wr.0].needs_grad {
                        contribs.push((wr, gre));
                    }
                    if self.nodes[wi.0].needs_grad {
                        contribs.push((wi, gim));
                    }
                }
                Op::Reshape(a) => contribs.push((a, g.clone())),
                Op::Mean(a) => {
                    let n = self.value(a).len();
                    contribs.push((a, vec![g[0] / n as f64; n]));
                }
                Op::Relu(a) => {
                    let x = self.value(a).data();
                    contribs.push((a, g.iter().zip(x).map(|(g, &x)| if x > 0.0 { *g } else { 0.0 }).collect()));
                }
                Op::Sigmoid(a) => {
                    let y = node.value.data();
                    contribs.push((a, g.iter().zip(y).map(|(g, y)| g * y * (1.0 - y)).collect()));
                }
                Op::Sine(a) => {
                    let x = self.value(a).data();
                    contribs.push((a, g.iter().zip(x).map(|(g, x)| g * x.cos()).collect()));
                }
            }
            for (v, c) in contribs {
                if !self.nodes[v.0].needs_grad {
                    continue;
                }
                match &mut grads[v.0] {
                    Some(acc) => acc.iter_mut().zip(&c).for_each(|(a, b)| *a += b),
                    slot @ None => *slot = Some(c),
                }
            }
            grads[id] = Some(g);
        }

        let grads = grads
            .into_iter()
            .zip(&self.nodes)
            .map(|(g, n)| g.map(|g| Tensor::new(n.value.shape(), g).expect("gradient shape")))
            .collect();
        let shapes = self.nodes.iter().map(|n| n.value.shape().to_vec()).collect();
        Ok(Gradients { grads, shapes })
    }
}

pub(crate) fn sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

/// Per-node gradients from one backward pass.
#[derive(Debug)]
pub struct Gradients {
    grads: Vec<Option<Tensor>>,
    shapes: Vec<Vec<usize>>,
}

impl Gradients {
    /// Gradient of the loss with respect to `v`; zero if `v` does not feed the loss.
    pub fn get(&self, v: Var) -> Tensor {
        match &self.grads[v.0] {
            Some(g) => g.clone(),
            None => Tensor::zeros(&self.shapes[v.0]),
        }
    }

    pub fn take(&mut self, v: Var) -> Tensor {
        match self.grads[v.0].take() {
            Some(g) => g,
            None => Tensor::zeros(&self.shapes[v.0]),
        }
    }

    pub fn is_reached(&self, v: Var) -> bool {
        self.grads[v.0].is_some()
    }
}
