//! Two-dimensional Fourier neural operator applied recurrently in time.

use std::time::Instant;

use rand::Rng;

use super::deeponet::{TrainConfig, TrainLog};
use crate::error::{Error, Result};
use crate::pipeline::container::{Container, Manifest};
use crate::rng::{derived, permutation};
use crate::tensor::nn::{glorot, Bound};
use crate::tensor::{Activation, Adam, Conv2d, ParamId, ParamStore, Tape, Tensor, Var};

#[derive(Clone, Debug, PartialEq)]
pub struct FnoConfig {
    pub nx: usize,
    pub ny: usize,
    pub width: usize,
    pub layers: usize,
    /// Retained frequencies per axis on each side of zero.
    pub modes: usize,
    pub activation: Activation,
    pub seed: u64,
}

impl FnoConfig {
    pub fn new(nx: usize, ny: usize, seed: u64) -> Self {
        Self {
            nx,
            ny,
            width: 32,
            layers: 4,
            modes: 8,
            activation: Activation::Relu,
            seed,
        }
    }

    pub fn validate(&self) -> Result<()> {
        for e in [self.nx, self.ny] {
            if !e.is_power_of_two() || e < 2 {
                return Err(Error::NotPowerOfTwo { extent: e });
            }
        }
        if self.modes == 0 || 2 * self.modes > self.nx.min(self.ny) {
            return Err(Error::invalid(format!(
                "{} modes per side do not fit a {}x{} grid",
                self.modes, self.nx, self.ny
            )));
        }
        if self.width == 0 {
            return Err(Error::invalid("FNO width must be positive"));
        }
        Ok(())
    }
}

/// `σ(W·v + b + F⁻¹(R·F(v)))`.
#[derive(Clone, Debug)]
pub struct FourierLayer {
    pub w_re: ParamId,
    pub w_im: ParamId,
    pub pointwise: Conv2d,
}

impl FourierLayer {
    pub fn new(store: &mut ParamStore, rng: &mut crate::rng::SeededRng, name: &str, width: usize, modes: usize) -> Self {
        let scale = 1.0 / (width * width) as f64;
        let shape = [2 * modes, 2 * modes, width, width];
        let w_re = store.add(format!("{name}.r_re"), Tensor::from_fn(&shape, |_| scale * rng.gen::<f64>()));
        let w_im = store.add(format!("{name}.r_im"), Tensor::from_fn(&shape, |_| scale * rng.gen::<f64>()));
        let pointwise = Conv2d::new(store, rng, &format!("{name}.w"), width, width, 1, Activation::Identity);
        Self { w_re, w_im, pointwise }
    }

    pub fn forward(&self, tape: &mut Tape, p: &Bound, v: Var, modes: usize, act: Activation) -> Result<Var> {
        let local = self.pointwise.forward(tape, p, v)?;
        let spectral = tape.spectral_conv2d(v, p.var(self.w_re), p.var(self.w_im), modes)?;
        let h = tape.add(local, spectral)?;
        act.apply(tape, h)
    }
}

#[derive(Clone, Debug)]
pub struct FnoModel {
    pub config: FnoConfig,
    store: ParamStore,
    lift_u: ParamId,
    lift_xy: ParamId,
    lift_b: ParamId,
    pub layers: Vec<FourierLayer>,
    project: Conv2d,
}

impl FnoModel {
    pub fn new(config: FnoConfig) -> Result<Self> {
        config.validate()?;
        let mut rng = derived(config.seed, 0x666e6f);
        let mut store = ParamStore::new();
        let w = config.width;
        let lift_u = store.add("lift.u", glorot(&mut rng, &[w, 1, 1, 1], 3, w));
        let lift_xy = store.add("lift.xy", glorot(&mut rng, &[w, 2, 1, 1], 3, w));
        let lift_b = store.add("lift.b", Tensor::zeros(&[w, 1, 1]));
        let layers = (0..config.layers)
            .map(|i| FourierLayer::new(&mut store, &mut rng, &format!("layer{i}"), w, config.modes))
            .collect();
        let project = Conv2d::new(&mut store, &mut rng, "project", w, 1, 1, Activation::Identity);
        Ok(Self {
            config,
            store,
            lift_u,
            lift_xy,
            lift_b,
            layers,
            project,
        })
    }

    pub fn param_count(&self) -> usize {
        self.store.count()
    }

    pub fn params(&self) -> &ParamStore {
        &self.store
    }

    pub fn params_mut(&mut self) -> &mut ParamStore {
        &mut self.store
    }

    /// Channels `(x, y)` of the periodic grid, `[1, 2, nx, ny]`.
    pub fn grid_coords(&self) -> Tensor {
        let (nx, ny) = (self.config.nx, self.config.ny);
        Tensor::from_fn(&[1, 2, nx, ny], |i| {
            let (c, k) = (i / (nx * ny), i % (nx * ny));
            if c == 0 {
                (k / ny) as f64 / nx as f64
            } else {
                (k % ny) as f64 / ny as f64
            }
        })
    }

    /// One application `[B, 1, nx, ny] → [B, 1, nx, ny]`.
    pub fn step_on_tape(&self, tape: &mut Tape, p: &Bound, u: Var) -> Result<Var> {
        let coords = tape.constant(self.grid_coords());
        let a = tape.conv2d(u, p.var(self.lift_u))?;
        let c = tape.conv2d(coords, p.var(self.lift_xy))?;
        let v = tape.add(a, c)?;
        let mut v = tape.add(v, p.var(self.lift_b))?;
        for layer in &self.layers {
            v = layer.forward(tape, p, v, self.config.modes, self.config.activation)?;
        }
        self.project.forward(tape, p, v)
    }

    fn check_fields(&self, fields: &Tensor) -> Result<usize> {
        let points = self.config.nx * self.config.ny;
        if fields.rank() != 2 || fields.shape()[1] != points {
            return Err(Error::Shape {
                op: "fno_input",
                lhs: fields.shape().to_vec(),
                rhs: vec![points],
            });
        }
        Ok(fields.shape()[0])
    }

    /// One step on flattened fields `[B, nx·ny]`.
    pub fn step(&self, fields: &Tensor) -> Result<Tensor> {
        let b = self.check_fields(fields)?;
        let (nx, ny) = (self.config.nx, self.config.ny);
        let mut tape = Tape::new();
        let p = self.store.bind(&mut tape);
        let u = tape.constant(fields.reshape(&[b, 1, nx, ny])?);
        let y = self.step_on_tape(&mut tape, &p, u)?;
        tape.value(y).reshape(&[b, nx * ny])
    }

    /// Recurrent rollout `[B, nx·ny] → [B, steps, nx·ny]`; the first output
    /// is one application to the input.
    pub fn rollout(&self, fields: &Tensor, steps: usize) -> Result<Tensor> {
        let b = self.check_fields(fields)?;
        let points = fields.shape()[1];
        let mut out = vec![0.0; b * steps * points];
        let mut v = fields.clone();
        for t in 0..steps {
            v = self.step(&v)?;
            for bi in 0..b {
                out[(bi * steps + t) * points..(bi * steps + t + 1) * points].copy_from_slice(v.row(bi));
            }
        }
        Tensor::new(&[b, steps, points], out)
    }

    pub fn to_container(&self) -> Container {
        let c = &self.config;
        let mut m = Manifest::new();
        m.set("model", "fno")
            .set("nx", c.nx)
            .set("ny", c.ny)
            .set("width", c.width)
            .set("layers", c.layers)
            .set("modes", c.modes)
            .set("activation", activation_name(c.activation))
            .set("seed", c.seed);
        let mut out = Container::new(m);
        for (name, t) in self.store.iter() {
            out.push(name, t.clone());
        }
        out
    }

    pub fn from_container(c: &Container) -> Result<Self> {
        let m = &c.manifest;
        if m.get("model") != Some("fno") {
            return Err(Error::invalid("container does not hold an FNO"));
        }
        let config = FnoConfig {
            nx: m.parse("nx")?,
            ny: m.parse("ny")?,
            width: m.parse("width")?,
            layers: m.parse("layers")?,
            modes: m.parse("modes")?,
            activation: parse_activation(&m.parse::<String>("activation")?)?,
            seed: m.parse("seed")?,
        };
        let mut model = Self::new(config)?;
        model.store.load(|name| c.get(name).ok())?;
        Ok(model)
    }
}

fn activation_name(a: Activation) -> &'static str {
    match a {
        Activation::Identity => "identity",
        Activation::Relu => "relu",
        Activation::Sigmoid => "sigmoid",
        Activation::Sine => "sine",
    }
}

fn parse_activation(s: &str) -> Result<Activation> {
    Ok(match s {
        "identity" => Activation::Identity,
        "relu" => Activation::Relu,
        "sigmoid" => Activation::Sigmoid,
        "sine" => Activation::Sine,
        other => return Err(Error::invalid(format!("unknown activation '{other}'"))),
    })
}

/// One-step training pairs: input → first snapshot, and each snapshot → the next.
pub fn fno_pairs(inputs: &Tensor, outputs: &Tensor) -> Result<(Tensor, Tensor)> {
    let s = outputs.shape();
    if s.len() != 3 || inputs.shape() != [s[0], s[2]] {
        return Err(Error::Shape {
            op: "fno_pairs",
            lhs: inputs.shape().to_vec(),
            rhs: s.to_vec(),
        });
    }
    let (n, steps, points) = (s[0], s[1], s[2]);
    let mut x = Vec::with_capacity(n * steps * points);
    let mut y = Vec::with_capacity(n * steps * points);
    for i in 0..n {
        let traj = &outputs.data()[i * steps * points..(i + 1) * steps * points];
        x.extend_from_slice(inputs.row(i));
        x.extend_from_slice(&traj[..(steps - 1) * points]);
        y.extend_from_slice(traj);
    }
    Ok((Tensor::new(&[n * steps, points], x)?, Tensor::new(&[n * steps, points], y)?))
}

pub fn train_fno(model: &mut FnoModel, inputs: &Tensor, outputs: &Tensor, cfg: &TrainConfig) -> Result<TrainLog> {
    let (x, y) = fno_pairs(inputs, outputs)?;
    if cfg.batch == 0 || cfg.epochs == 0 {
        return Err(Error::invalid("epochs and batch size must be positive"));
    }
    let (nx, ny) = (model.config.nx, model.config.ny);
    let n = x.shape()[0];
    let mut opt = Adam::new(cfg.lr);
    let mut shuffle = derived(cfg.seed, 0x666e6f74);
    let start = Instant::now();
    let mut losses = Vec::with_capacity(cfg.epochs);
    for epoch in 0..cfg.epochs {
        let order = permutation(&mut shuffle, n);
        let mut total = 0.0;
        for chunk in order.chunks(cfg.batch) {
            let b = chunk.len();
            let mut tape = Tape::new();
            let p = model.store.bind(&mut tape);
            let xv = tape.constant(x.select_rows(chunk).reshape(&[b, 1, nx, ny])?);
            let yv = tape.constant(y.select_rows(chunk).reshape(&[b, 1, nx, ny])?);
            let pred = model.step_on_tape(&mut tape, &p, xv)?;
            let loss = tape.mse(pred, yv)?;
            let value = tape.value(loss).item();
            if !value.is_finite() {
                return Err(Error::Numeric(format!("FNO loss is {value} at epoch {epoch}")));
            }
            total += value * b as f64;
            let grads = tape.backward(loss)?;
            let g: Vec<Option<Tensor>> = p.vars().iter().map(|&v| Some(grads.get(v))).collect();
            opt.step(&mut model.store, &g)?;
        }
        let epoch_loss = total / n as f64;
        log::debug!("fno epoch {epoch}: {epoch_loss:.6e}");
        losses.push(epoch_loss);
    }
    Ok(TrainLog {
        epoch_losses: losses,
        seconds: start.elapsed().as_secs_f64().max(f64::MIN_POSITIVE),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::Normal;
    use std::f64::consts::PI;

    fn layer_model(width: usize, modes: usize) -> (ParamStore, FourierLayer) {
        let mut store = ParamStore::new();
        let mut rng = derived(0, 1);
        let layer = FourierLayer::new(&mut store, &mut rng, "l", width, modes);
        (store, layer)
    }

    /// R = identity on every retained mode, W = 0.
    fn identity_weights(store: &mut ParamStore, layer: &FourierLayer, width: usize) {
        let re = store.get_mut(layer.w_re);
        let per = width * width;
        let n = re.len() / per;
        re.data_mut().iter_mut().for_each(|v| *v = 0.0);
        for m in 0..n {
            for c in 0..width {
                re.data_mut()[m * per + c * width + c] = 1.0;
            }
        }
        store.get_mut(layer.w_im).data_mut().iter_mut().for_each(|v| *v = 0.0);
        store.get_mut(layer.pointwise.kernel).data_mut().iter_mut().for_each(|v| *v = 0.0);
    }

    fn apply(store: &ParamStore, layer: &FourierLayer, x: &Tensor, modes: usize, act: Activation) -> Tensor {
        let mut tape = Tape::new();
        let p = store.bind(&mut tape);
        let v = tape.constant(x.clone());
        let y = layer.forward(&mut tape, &p, v, modes, act).unwrap();
        tape.value(y).clone()
    }

    #[test]
    fn identity_configuration_reproduces_input() {
        let (mut store, layer) = layer_model(2, 4);
        identity_weights(&mut store, &layer, 2);
        let mut g = Normal::from_seed(3);
        let x = Tensor::from_fn(&[2, 2, 8, 8], |_| g.sample());
        let y = apply(&store, &layer, &x, 4, Activation::Identity);
        assert!(y.max_abs_diff(&x) < 1e-6);
    }

    #[test]
    fn zero_weights_give_activation_of_zero() {
        let (mut store, layer) = layer_model(2, 2);
        for id in [layer.w_re, layer.w_im, layer.pointwise.kernel] {
            store.get_mut(id).data_mut().iter_mut().for_each(|v| *v = 0.0);
        }
        let x = Tensor::full(&[1, 2, 8, 8], 0.7);
        let y = apply(&store, &layer, &x, 2, Activation::Sigmoid);
        assert!(y.data().iter().all(|&v| (v - 0.5).abs() < 1e-15));
    }

    #[test]
    fn out_of_band_mode_is_removed() {
        let (mut store, layer) = layer_model(1, 4);
        identity_weights(&mut store, &layer, 1);
        let x = Tensor::from_fn(&[1, 1, 16, 16], |i| (2.0 * PI * 6.0 * (i / 16) as f64 / 16.0).cos());
        let y = apply(&store, &layer, &x, 4, Activation::Identity);
        assert!(y.data().iter().all(|v| v.abs() < 1e-10));
    }

    #[test]
    fn circular_shift_commutes_with_layer() {
        let (store, layer) = layer_model(2, 2);
        let mut g = Normal::from_seed(4);
        let x = Tensor::from_fn(&[1, 2, 8, 8], |_| g.sample());
        let shift = |t: &Tensor| {
            Tensor::from_fn(t.shape(), |i| {
                let (c, r, col) = (i / 64, (i / 8) % 8, i % 8);
                t.data()[c * 64 + ((r + 8 - 3) % 8) * 8 + (col + 8 - 1) % 8]
            })
        };
        let a = shift(&apply(&store, &layer, &x, 2, Activation::Relu));
        let b = apply(&store, &layer, &shift(&x), 2, Activation::Relu);
        assert!(a.max_abs_diff(&b) < 1e-8);
    }

    #[test]
    fn rejects_bad_grids() {
        assert!(matches!(FnoModel::new(FnoConfig::new(12, 16, 0)), Err(Error::NotPowerOfTwo { extent: 12 })));
        assert!(FnoModel::new(FnoConfig { modes: 9, ..FnoConfig::new(16, 16, 0) }).is_err());
    }

    #[test]
    fn rollout_shape_training_and_roundtrip() {
        let cfg = FnoConfig {
            width: 4,
            layers: 1,
            modes: 2,
            ..FnoConfig::new(8, 8, 1)
        };
        let mut m = FnoModel::new(cfg).unwrap();
        let mut g = Normal::from_seed(6);
        let x = Tensor::from_fn(&[3, 64], |_| g.sample());
        let y = Tensor::from_fn(&[3, 2, 64], |_| g.sample());
        let (px, py) = fno_pairs(&x, &y).unwrap();
        assert_eq!(px.row(1), y.row(0).get(..64).unwrap());
        assert_eq!(py.shape(), &[6, 64]);
        let log = train_fno(&mut m, &x, &y, &TrainConfig { epochs: 2, batch: 4, lr: 1e-3, seed: 0 }).unwrap();
        assert_eq!(log.epoch_losses.len(), 2);
        assert_eq!(m.rollout(&x, 2).unwrap().shape(), &[3, 2, 64]);
        let back = FnoModel::from_container(&Container::from_bytes(&m.to_container().to_bytes().unwrap()).unwrap()).unwrap();
        assert_eq!(back.step(&x).unwrap(), m.step(&x).unwrap());
    }
}
