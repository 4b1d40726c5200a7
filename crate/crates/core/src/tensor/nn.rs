//! Parameter storage and the handful of layers the operator networks use.

use rand::Rng;

use super::{Tape, Tensor, Var};
use crate::error::{Error, Result};
use crate::rng::SeededRng;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct ParamId(usize);

/// Named trainable tensors, in registration order.
#[derive(Clone, Debug, Default)]
pub struct ParamStore {
    names: Vec<String>,
    values: Vec<Tensor>,
}

impl ParamStore {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add(&mut self, name: impl Into<String>, value: Tensor) -> ParamId {
        self.names.push(name.into());
        self.values.push(value);
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

    pub fn get_mut(&mut self, id: ParamId) -> &mut Tensor {
        &mut self.values[id.0]
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn values(&self) -> &[Tensor] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [Tensor] {
        &mut self.values
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, &Tensor)> {
        self.names.iter().map(String::as_str).zip(&self.values)
    }

    pub fn find(&self, name: &str) -> Option<ParamId> {
        self.names.iter().position(|n| n == name).map(ParamId)
    }

    /// Total number of scalar parameters.
    pub fn count(&self) -> usize {
        self.values.iter().map(Tensor::len).sum()
    }

    /// Records every parameter as a differentiable leaf on `tape`.
    pub fn bind(&self, tape: &mut Tape) -> Bound {
        Bound(self.values.iter().map(|v| tape.leaf(v.clone())).collect())
    }

    /// Replaces values by name; every stored name must be present with a matching shape.
    pub fn load<'a>(&mut self, mut lookup: impl FnMut(&str) -> Option<&'a Tensor>) -> Result<()> {
        for (name, value) in self.names.iter().zip(self.values.iter_mut()) {
            let t = lookup(name).ok_or_else(|| Error::invalid(format!("missing parameter `{name}`")))?;
            if t.shape() != value.shape() {
                return Err(Error::invalid(format!(
                    "parameter `{name}` has shape {:?}, expected {:?}",
                    t.shape(),
                    value.shape()
                )));
            }
            *value = t.clone();
        }
        Ok(())
    }
}

/// Tape handles for a [`ParamStore`], indexed by [`ParamId`].
#[derive(Clone, Debug)]
pub struct Bound(Vec<Var>);

impl Bound {
    pub fn var(&self, id: ParamId) -> Var {
        self.0[id.0]
    }

    pub fn vars(&self) -> &[Var] {
        &self.0
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Activation {
    Identity,
    Relu,
    Sigmoid,
    Sine,
}

impl Activation {
    pub fn apply(self, tape: &mut Tape, x: Var) -> Result<Var> {
        match self {
            Activation::Identity => Ok(x),
            Activation::Relu => tape.relu(x),
            Activation::Sigmoid => tape.sigmoid(x),
            Activation::Sine => tape.sine(x),
        }
    }
}

/// Glorot-uniform sample in ±sqrt(6 / (fan_in + fan_out)).
pub fn glorot(rng: &mut SeededRng, shape: &[usize], fan_in: usize, fan_out: usize) -> Tensor {
    let limit = (6.0 / (fan_in + fan_out) as f64).sqrt();
    Tensor::from_fn(shape, |_| rng.gen_range(-limit..=limit))
}

/// `y = act(x·W + b)` on `[batch, in]` rows.
#[derive(Clone, Debug)]
pub struct Dense {
    pub w: ParamId,
    pub b: ParamId,
    pub act: Activation,
    pub fan_in: usize,
    pub fan_out: usize,
}

impl Dense {
    pub fn new(
        store: &mut ParamStore,
        rng: &mut SeededRng,
        name: &str,
        fan_in: usize,
        fan_out: usize,
        act: Activation,
    ) -> Self {
        let w = store.add(format!("{name}.w"), glorot(rng, &[fan_in, fan_out], fan_in, fan_out));
        let b = store.add(format!("{name}.b"), Tensor::zeros(&[fan_out]));
        Self {
            w,
            b,
            act,
            fan_in,
            fan_out,
        }
    }

    pub fn forward(&self, tape: &mut Tape, p: &Bound, x: Var) -> Result<Var> {
        let h = tape.matmul(x, p.var(self.w))?;
        let h = tape.add(h, p.var(self.b))?;
        self.act.apply(tape, h)
    }
}

/// Size-preserving 2-D convolution with a per-channel bias.
#[derive(Clone, Debug)]
pub struct Conv2d {
    pub kernel: ParamId,
    pub bias: ParamId,
    pub act: Activation,
}

impl Conv2d {
    pub fn new(
        store: &mut ParamStore,
        rng: &mut SeededRng,
        name: &str,
        c_in: usize,
        c_out: usize,
        size: usize,
        act: Activation,
    ) -> Self {
        let area = size * size;
        let kernel = store.add(
            format!("{name}.kernel"),
            glorot(rng, &[c_out, c_in, size, size], c_in * area, c_out * area),
        );
        let bias = store.add(format!("{name}.bias"), Tensor::zeros(&[c_out, 1, 1]));
        Self { kernel, bias, act }
    }

    pub fn forward(&self, tape: &mut Tape, p: &Bound, x: Var) -> Result<Var> {
        let h = tape.conv2d(x, p.var(self.kernel))?;
        let h = tape.add(h, p.var(self.bias))?;
        self.act.apply(tape, h)
    }
}

/// Per-channel standardization against running batch statistics, followed
/// by a learned scale and shift.
///
/// In training mode the running mean/variance are first blended with the
/// current batch (`running = momentum·running + (1-momentum)·batch`); the
/// statistics are then treated as constants on the tape.
#[derive(Clone, Debug)]
pub struct ChannelNorm {
    pub gamma: ParamId,
    pub beta: ParamId,
    pub running_mean: Vec<f64>,
    pub running_var: Vec<f64>,
    pub momentum: f64,
    pub eps: f64,
}

impl ChannelNorm {
    pub fn new(store: &mut ParamStore, name: &str, channels: usize) -> Self {
        let gamma = store.add(format!("{name}.gamma"), Tensor::full(&[channels, 1, 1], 1.0));
        let beta = store.add(format!("{name}.beta"), Tensor::zeros(&[channels, 1, 1]));
        Self {
            gamma,
            beta,
            running_mean: vec![0.0; channels],
            running_var: vec![1.0; channels],
            momentum: 0.9,
            eps: 1e-5,
        }
    }

    pub fn channels(&self) -> usize {
        self.running_mean.len()
    }

    pub fn update_stats(&mut self, x: &Tensor) {
        let s = x.shape();
        let (b, c, hw) = (s[0], s[1], s[2] * s[3]);
        let n = (b * hw) as f64;
        for ch in 0..c {
            let mut sum = 0.0;
            for bi in 0..b {
                sum += x.data()[(bi * c + ch) * hw..(bi * c + ch + 1) * hw].iter().sum::<f64>();
            }
            let mean = sum / n;
            let mut sq = 0.0;
            for bi in 0..b {
                sq += x.data()[(bi * c + ch) * hw..(bi * c + ch + 1) * hw]
                    .iter()
                    .map(|v| (v - mean).powi(2))
                    .sum::<f64>();
            }
            let var = sq / n;
            self.running_mean[ch] = self.momentum * self.running_mean[ch] + (1.0 - self.momentum) * mean;
            self.running_var[ch] = self.momentum * self.running_var[ch] + (1.0 - self.momentum) * var;
        }
    }

    /// Updates the running statistics from `x` when `train`, then applies.
    pub fn forward(&mut self, tape: &mut Tape, p: &Bound, x: Var, train: bool) -> Result<Var> {
        self.check(tape, x)?;
        if train {
            let value = tape.value(x).clone();
            self.update_stats(&value);
        }
        self.apply(tape, p, x)
    }

    fn check(&self, tape: &Tape, x: Var) -> Result<()> {
        let s = tape.shape(x);
        if s.len() != 4 || s[1] != self.channels() {
            return Err(Error::Shape {
                op: "channel_norm",
                lhs: s.to_vec(),
                rhs: vec![self.channels()],
            });
        }
        Ok(())
    }

    /// Normalizes with the current running statistics.
    pub fn apply(&self, tape: &mut Tape, p: &Bound, x: Var) -> Result<Var> {
        self.check(tape, x)?;
        let c = self.channels();
        let mean = tape.constant(Tensor::new(&[c, 1, 1], self.running_mean.clone())?);
        let inv = Tensor::new(
            &[c, 1, 1],
            self.running_var.iter().map(|v| 1.0 / (v + self.eps).sqrt()).collect(),
        )?;
        let inv = tape.constant(inv);
        let h = tape.sub(x, mean)?;
        let h = tape.mul(h, inv)?;
        let h = tape.mul(h, p.var(self.gamma))?;
        tape.add(h, p.var(self.beta))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::seeded;

    #[test]
    fn glorot_bounds() {
        let mut rng = seeded(0);
        let t = glorot(&mut rng, &[30, 20], 30, 20);
        let limit = (6.0f64 / 50.0).sqrt();
        assert!(t.data().iter().all(|v| v.abs() <= limit));
    }

    #[test]
    fn dense_shapes_and_count() {
        let mut store = ParamStore::new();
        let mut rng = seeded(0);
        let layer = Dense::new(&mut store, &mut rng, "l0", 4, 3, Activation::Relu);
        assert_eq!(store.count(), 4 * 3 + 3);
        let mut tape = Tape::new();
        let p = store.bind(&mut tape);
        let x = tape.constant(Tensor::full(&[5, 4], 0.5));
        let y = layer.forward(&mut tape, &p, x).unwrap();
        assert_eq!(tape.shape(y), &[5, 3]);
    }

    #[test]
    fn channel_norm_standardizes_with_converged_stats() {
        let mut store = ParamStore::new();
        let mut norm = ChannelNorm::new(&mut store, "bn", 2);
        let x = Tensor::from_fn(&[3, 2, 2, 2], |i| (i as f64) * 0.3 - 1.0);
        // Drive the running statistics to the batch statistics.
        for _ in 0..400 {
            norm.update_stats(&x);
        }
        let mut tape = Tape::new();
        let p = store.bind(&mut tape);
        let xv = tape.constant(x);
        let y = norm.forward(&mut tape, &p, xv, false).unwrap();
        let y = tape.value(y);
        for ch in 0..2 {
            let vals: Vec<f64> = (0..3)
                .flat_map(|b| y.data()[(b * 2 + ch) * 4..(b * 2 + ch + 1) * 4].to_vec())
                .collect();
            let mean = vals.iter().sum::<f64>() / vals.len() as f64;
            let var = vals.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / vals.len() as f64;
            assert!(mean.abs() < 1e-9);
            assert!((var - 1.0).abs() < 1e-3);
        }
    }

    #[test]
    fn load_rejects_shape_change() {
        let mut store = ParamStore::new();
        store.add("a", Tensor::zeros(&[2]));
        let other = Tensor::zeros(&[3]);
        assert!(store.load(|_| Some(&other)).is_err());
    }
}
