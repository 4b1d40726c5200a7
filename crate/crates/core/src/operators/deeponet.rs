//! DeepONet with a convolutional (or dense) branch and a sine trunk.
//!
//! For every output coordinate `j` and time `ζ_k` the prediction is
//! `Σ_i b_{j,i}(x) · t_i(ζ_k) + b₀`. In latent mode the branch emits the
//! `d × p` coefficients and the trunk emits `p` values per `ζ`. In full mode
//! the branch emits `p` coefficients and the trunk emits `p` values per grid
//! point and `ζ`.

use std::fmt;
use std::str::FromStr;
use std::time::Instant;

use crate::dimred::{tensor_vec, vec_tensor};
use crate::error::{Error, Result};
use crate::pipeline::container::{Container, Manifest};
use crate::rng::{derived, permutation};
use crate::tensor::nn::Bound;
use crate::tensor::{Activation, Adam, ChannelNorm, Conv2d, Dense, ParamId, ParamStore, Tape, Tensor, Var};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum OperatorMode {
    Latent,
    Full,
}

impl fmt::Display for OperatorMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            OperatorMode::Latent => "latent",
            OperatorMode::Full => "full",
        })
    }
}

impl FromStr for OperatorMode {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "latent" => Ok(OperatorMode::Latent),
            "full" => Ok(OperatorMode::Full),
            other => Err(Error::invalid(format!("unknown operator mode '{other}'"))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BranchKind {
    Conv,
    Dense,
}

impl fmt::Display for BranchKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            BranchKind::Conv => "conv",
            BranchKind::Dense => "dense",
        })
    }
}

impl FromStr for BranchKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "conv" => Ok(BranchKind::Conv),
            "dense" => Ok(BranchKind::Dense),
            other => Err(Error::invalid(format!("unknown branch kind '{other}'"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct DeepOnetConfig {
    pub mode: OperatorMode,
    /// Flattened input width: `d` in latent mode, `nx·ny` in full mode.
    pub in_dim: usize,
    /// Output coordinates per time: `d` or `nx·ny`.
    pub out_dim: usize,
    /// Image shape the conv branch reshapes its input to.
    pub image: (usize, usize),
    pub p: usize,
    pub branch: BranchKind,
    pub filters: Vec<usize>,
    pub kernel: usize,
    pub trunk_width: usize,
    pub trunk_depth: usize,
    pub seed: u64,
}

impl DeepOnetConfig {
    pub fn latent(d: usize, p: usize, seed: u64) -> Self {
        let side = (d as f64).sqrt().round() as usize;
        Self {
            mode: OperatorMode::Latent,
            in_dim: d,
            out_dim: d,
            image: (side, side),
            p,
            branch: BranchKind::Conv,
            filters: vec![32, 16, 16],
            kernel: 3,
            trunk_width: 100,
            trunk_depth: 2,
            seed,
        }
    }

    pub fn full(nx: usize, ny: usize, p: usize, seed: u64) -> Self {
        Self {
            mode: OperatorMode::Full,
            in_dim: nx * ny,
            out_dim: nx * ny,
            image: (nx, ny),
            ..Self::latent(1, p, seed)
        }
    }

    fn branch_width(&self) -> usize {
        match self.mode {
            OperatorMode::Latent => self.out_dim * self.p,
            OperatorMode::Full => self.p,
        }
    }

    fn trunk_width_out(&self) -> usize {
        match self.mode {
            OperatorMode::Latent => self.p,
            OperatorMode::Full => self.out_dim * self.p,
        }
    }
}

#[derive(Clone, Debug)]
enum Branch {
    Conv {
        convs: Vec<Conv2d>,
        norms: Vec<ChannelNorm>,
        out: Dense,
    },
    Dense {
        layers: Vec<Dense>,
    },
}

#[derive(Clone, Debug)]
pub struct DeepOnetModel {
    pub config: DeepOnetConfig,
    store: ParamStore,
    branch: Branch,
    trunk: Vec<Dense>,
    b0: ParamId,
}

impl DeepOnetModel {
    pub fn new(mut config: DeepOnetConfig) -> Result<Self> {
        if config.p == 0 || config.in_dim == 0 || config.out_dim == 0 {
            return Err(Error::invalid("DeepONet widths must be positive"));
        }
        if config.branch == BranchKind::Conv && config.image.0 * config.image.1 != config.in_dim {
            log::warn!(
                "input width {} is not a square image; using the dense branch",
                config.in_dim
            );
            config.branch = BranchKind::Dense;
        }
        if config.kernel % 2 == 0 {
            return Err(Error::invalid("conv kernel size must be odd"));
        }
        let mut rng = derived(config.seed, 0x646f6e);
        let mut store = ParamStore::new();
        let width = config.branch_width();
        let branch = match config.branch {
            BranchKind::Conv => {
                let mut convs = Vec::new();
                let mut norms = Vec::new();
                let mut c_in = 1;
                for (i, &f) in config.filters.iter().enumerate() {
                    let name = format!("branch.conv{i}");
                    convs.push(Conv2d::new(&mut store, &mut rng, &name, c_in, f, config.kernel, Activation::Sine));
                    norms.push(ChannelNorm::new(&mut store, &format!("branch.bn{i}"), f));
                    c_in = f;
                }
                let flat = c_in * config.in_dim;
                let out = Dense::new(&mut store, &mut rng, "branch.out", flat, width, Activation::Identity);
                Branch::Conv { convs, norms, out }
            }
            BranchKind::Dense => {
                let h = config.trunk_width;
                let layers = vec![
                    Dense::new(&mut store, &mut rng, "branch.dense0", config.in_dim, h, Activation::Sine),
                    Dense::new(&mut store, &mut rng, "branch.dense1", h, h, Activation::Sine),
                    Dense::new(&mut store, &mut rng, "branch.out", h, width, Activation::Identity),
                ];
                Branch::Dense { layers }
            }
        };
        let mut trunk = Vec::new();
        let mut fan_in = 1;
        for i in 0..config.trunk_depth {
            let name = format!("trunk.dense{i}");
            trunk.push(Dense::new(&mut store, &mut rng, &name, fan_in, config.trunk_width, Activation::Sine));
            fan_in = config.trunk_width;
        }
        let out_w = config.trunk_width_out();
        trunk.push(Dense::new(&mut store, &mut rng, "trunk.out", fan_in, out_w, Activation::Identity));
        let b0 = store.add("b0", Tensor::zeros(&[1]));
        Ok(Self {
            config,
            store,
            branch,
            trunk,
            b0,
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

    pub fn b0(&self) -> f64 {
        self.store.get(self.b0).item()
    }

    pub fn set_b0(&mut self, v: f64) {
        self.store.get_mut(self.b0).data_mut()[0] = v;
    }

    pub fn branch_kind(&self) -> BranchKind {
        self.config.branch
    }

    fn check_input(&self, x: &Tensor) -> Result<()> {
        if x.rank() != 2 || x.shape()[1] != self.config.in_dim {
            return Err(Error::Shape {
                op: "deeponet_input",
                lhs: x.shape().to_vec(),
                rhs: vec![self.config.in_dim],
            });
        }
        Ok(())
    }

    fn zeta_tensor(zeta: &[f64]) -> Result<Tensor> {
        if zeta.is_empty() {
            return Err(Error::invalid("need at least one time coordinate"));
        }
        if let Some(z) = zeta.iter().find(|z| !(0.0..=1.0).contains(*z)) {
            return Err(Error::invalid(format!(
                "time coordinate {z} outside [0, 1]; the trunk only interpolates in time"
            )));
        }
        Tensor::new(&[zeta.len(), 1], zeta.to_vec())
    }

    fn branch_on_tape(&mut self, tape: &mut Tape, p: &Bound, x: Var, train: bool) -> Result<Var> {
        let batch = tape.shape(x)[0];
        match &mut self.branch {
            Branch::Conv { convs, norms, out } => {
                let (h, w) = self.config.image;
                let mut v = tape.reshape(x, &[batch, 1, h, w])?;
                for (conv, norm) in convs.iter().zip(norms.iter_mut()) {
                    v = conv.forward(tape, p, v)?;
                    v = if train {
                        norm.forward(tape, p, v, true)?
                    } else {
                        norm.apply(tape, p, v)?
                    };
                }
                let flat = tape.shape(v)[1..].iter().product();
                let v = tape.reshape(v, &[batch, flat])?;
                out.forward(tape, p, v)
            }
            Branch::Dense { layers } => {
                let mut v = x;
                for l in layers.iter() {
                    v = l.forward(tape, p, v)?;
                }
                Ok(v)
            }
        }
    }

    fn trunk_on_tape(&self, tape: &mut Tape, p: &Bound, z: Var) -> Result<Var> {
        let mut v = z;
        for l in &self.trunk {
            v = l.forward(tape, p, v)?;
        }
        Ok(v)
    }

    /// Prediction in the internal layout: `[B, d·T]` ordered `(j, t)` in
    /// latent mode, `[B, T·D]` ordered `(t, j)` in full mode.
    fn combine(&self, tape: &mut Tape, p: &Bound, b: Var, t: Var, steps: usize) -> Result<Var> {
        let batch = tape.shape(b)[0];
        let (pw, out) = (self.config.p, self.config.out_dim);
        let y = match self.config.mode {
            OperatorMode::Latent => {
                let b = tape.reshape(b, &[batch * out, pw])?;
                let tt = tape.transpose(t)?;
                tape.matmul(b, tt)?
            }
            OperatorMode::Full => {
                let t = tape.reshape(t, &[steps * out, pw])?;
                let tt = tape.transpose(t)?;
                tape.matmul(b, tt)?
            }
        };
        let y = tape.add(y, p.var(self.b0))?;
        tape.reshape(y, &[batch, out * steps])
    }

    fn run(&mut self, tape: &mut Tape, p: &Bound, x: Var, z: Var, train: bool) -> Result<Var> {
        let steps = tape.shape(z)[0];
        let b = self.branch_on_tape(tape, p, x, train)?;
        let t = self.trunk_on_tape(tape, p, z)?;
        self.combine(tape, p, b, t, steps)
    }

    /// Raw branch coefficients: `[B, d·p]` (latent, `p` contiguous per
    /// coordinate) or `[B, p]` (full).
    pub fn branch_outputs(&self, x: &Tensor) -> Result<Tensor> {
        self.check_input(x)?;
        let mut model = self.clone();
        let mut tape = Tape::new();
        let p = model.store.bind(&mut tape);
        let xv = tape.constant(x.clone());
        let b = model.branch_on_tape(&mut tape, &p, xv, false)?;
        Ok(tape.value(b).clone())
    }

    /// Raw trunk features: `[T, p]` (latent) or `[T, D·p]` (full, `p`
    /// contiguous per grid point).
    pub fn trunk_outputs(&self, zeta: &[f64]) -> Result<Tensor> {
        let z = Self::zeta_tensor(zeta)?;
        let mut tape = Tape::new();
        let p = self.store.bind(&mut tape);
        let zv = tape.constant(z);
        let t = self.trunk_on_tape(&mut tape, &p, zv)?;
        Ok(tape.value(t).clone())
    }

    /// Predictions `[B, T, out_dim]` at the time coordinates `zeta`.
    pub fn forward(&self, x: &Tensor, zeta: &[f64]) -> Result<Tensor> {
        self.check_input(x)?;
        let z = Self::zeta_tensor(zeta)?;
        let mut model = self.clone();
        let mut tape = Tape::new();
        let p = model.store.bind(&mut tape);
        let xv = tape.constant(x.clone());
        let zv = tape.constant(z);
        let y = model.run(&mut tape, &p, xv, zv, false)?;
        Ok(self.from_internal(tape.value(y), zeta.len()))
    }

    fn from_internal(&self, y: &Tensor, steps: usize) -> Tensor {
        let (batch, out) = (y.shape()[0], self.config.out_dim);
        match self.config.mode {
            OperatorMode::Full => y.reshape(&[batch, steps, out]).expect("layout"),
            OperatorMode::Latent => Tensor::from_fn(&[batch, steps, out], |i| {
                let (b, t, j) = (i / (steps * out), (i / out) % steps, i % out);
                y.data()[(b * out + j) * steps + t]
            }),
        }
    }

    fn to_internal(&self, y: &Tensor) -> Tensor {
        let s = y.shape();
        let (batch, steps, out) = (s[0], s[1], s[2]);
        match self.config.mode {
            OperatorMode::Full => y.reshape(&[batch, steps * out]).expect("layout"),
            OperatorMode::Latent => Tensor::from_fn(&[batch, out * steps], |i| {
                let (b, j, t) = (i / (out * steps), (i / steps) % out, i % steps);
                y.data()[(b * steps + t) * out + j]
            }),
        }
    }

    pub fn to_container(&self) -> Container {
        let c = &self.config;
        let mut m = Manifest::new();
        let filters: Vec<String> = c.filters.iter().map(|f| f.to_string()).collect();
        m.set("model", "deeponet")
            .set("mode", c.mode)
            .set("in_dim", c.in_dim)
            .set("out_dim", c.out_dim)
            .set("image", format!("{}x{}", c.image.0, c.image.1))
            .set("p", c.p)
            .set("branch", c.branch)
            .set("filters", filters.join(","))
            .set("kernel", c.kernel)
            .set("trunk_width", c.trunk_width)
            .set("trunk_depth", c.trunk_depth)
            .set("seed", c.seed);
        let mut out = Container::new(m);
        for (name, t) in self.store.iter() {
            out.push(name, t.clone());
        }
        if let Branch::Conv { norms, .. } = &self.branch {
            for (i, n) in norms.iter().enumerate() {
                out.push(format!("branch.bn{i}.running_mean"), vec_tensor(&n.running_mean));
                out.push(format!("branch.bn{i}.running_var"), vec_tensor(&n.running_var));
            }
        }
        out
    }

    pub fn from_container(c: &Container) -> Result<Self> {
        let m = &c.manifest;
        if m.get("model") != Some("deeponet") {
            return Err(Error::invalid("container does not hold a DeepONet"));
        }
        let image = m.parse::<String>("image")?;
        let (h, w) = image
            .split_once('x')
            .and_then(|(a, b)| Some((a.parse().ok()?, b.parse().ok()?)))
            .ok_or_else(|| Error::invalid(format!("malformed image shape '{image}'")))?;
        let filters = m
            .parse::<String>("filters")?
            .split(',')
            .map(|f| f.parse().map_err(|_| Error::invalid("malformed filters")))
            .collect::<Result<Vec<usize>>>()?;
        let config = DeepOnetConfig {
            mode: m.parse::<String>("mode")?.parse()?,
            in_dim: m.parse("in_dim")?,
            out_dim: m.parse("out_dim")?,
            image: (h, w),
            p: m.parse("p")?,
            branch: m.parse::<String>("branch")?.parse()?,
            filters,
            kernel: m.parse("kernel")?,
            trunk_width: m.parse("trunk_width")?,
            trunk_depth: m.parse("trunk_depth")?,
            seed: m.parse("seed")?,
        };
        let mut model = Self::new(config)?;
        model.store.load(|name| c.get(name).ok())?;
        if let Branch::Conv { norms, .. } = &mut model.branch {
            for (i, n) in norms.iter_mut().enumerate() {
                n.running_mean = tensor_vec(c.get(&format!("branch.bn{i}.running_mean"))?);
                n.running_var = tensor_vec(c.get(&format!("branch.bn{i}.running_var"))?);
            }
        }
        Ok(model)
    }
}

/// Fails when the latent model is not strictly smaller than the full one.
pub fn check_param_ordering(latent: &DeepOnetModel, full: &DeepOnetModel) -> Result<()> {
    let (l, f) = (latent.param_count(), full.param_count());
    if l >= f {
        return Err(Error::invalid(format!(
            "latent DeepONet has {l} parameters, not fewer than the full model's {f}"
        )));
    }
    Ok(())
}

#[derive(Clone, Debug, PartialEq)]
pub struct TrainConfig {
    pub epochs: usize,
    pub batch: usize,
    pub lr: f64,
    pub seed: u64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            epochs: 200,
            batch: 32,
            lr: 1e-3,
            seed: 0,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct TrainLog {
    pub epoch_losses: Vec<f64>,
    /// Monotonic wall-clock of the optimization loop.
    pub seconds: f64,
}

impl TrainLog {
    pub fn final_loss(&self) -> f64 {
        self.epoch_losses.last().copied().unwrap_or(f64::NAN)
    }
}

/// Minimizes the mean squared error between `model(inputs, zeta)` and
/// `targets` (`[N, T, out_dim]`) with Adam over shuffled minibatches.
pub fn train_deeponet(
    model: &mut DeepOnetModel,
    inputs: &Tensor,
    targets: &Tensor,
    zeta: &[f64],
    cfg: &TrainConfig,
) -> Result<TrainLog> {
    model.check_input(inputs)?;
    let n = inputs.shape()[0];
    let expected = [n, zeta.len(), model.config.out_dim];
    if targets.shape() != expected {
        return Err(Error::Shape {
            op: "train_deeponet",
            lhs: targets.shape().to_vec(),
            rhs: expected.to_vec(),
        });
    }
    if cfg.batch == 0 || cfg.epochs == 0 {
        return Err(Error::invalid("epochs and batch size must be positive"));
    }
    let z = DeepOnetModel::zeta_tensor(zeta)?;
    let internal = model.to_internal(targets);
    let mut opt = Adam::new(cfg.lr);
    let mut shuffle = derived(cfg.seed, 0x747261696e);
    let start = Instant::now();
    let mut losses = Vec::with_capacity(cfg.epochs);
    for epoch in 0..cfg.epochs {
        let order = permutation(&mut shuffle, n);
        let mut total = 0.0;
        for chunk in order.chunks(cfg.batch) {
            let mut tape = Tape::new();
            let p = model.store.bind(&mut tape);
            let xv = tape.constant(inputs.select_rows(chunk));
            let yv = tape.constant(internal.select_rows(chunk));
            let zv = tape.constant(z.clone());
            let pred = model.run(&mut tape, &p, xv, zv, true)?;
            let loss = tape.mse(pred, yv)?;
            let value = tape.value(loss).item();
            if !value.is_finite() {
                return Err(Error::Numeric(format!("DeepONet loss is {value} at epoch {epoch}")));
            }
            total += value * chunk.len() as f64;
            let grads = tape.backward(loss)?;
            let g: Vec<Option<Tensor>> = p.vars().iter().map(|&v| Some(grads.get(v))).collect();
            opt.step(&mut model.store, &g)?;
        }
        let epoch_loss = total / n as f64;
        log::debug!("deeponet {} epoch {epoch}: {epoch_loss:.6e}", model.config.mode);
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

    fn random(shape: &[usize], seed: u64) -> Tensor {
        let mut g = Normal::from_seed(seed);
        Tensor::from_fn(shape, |_| 0.5 * g.sample())
    }

    #[test]
    fn latent_model_is_smaller_than_full_by_default() {
        let latent = DeepOnetModel::new(DeepOnetConfig::latent(64, 5, 0)).unwrap();
        let full = DeepOnetModel::new(DeepOnetConfig::full(32, 32, 5, 0)).unwrap();
        check_param_ordering(&latent, &full).unwrap();
        assert!(check_param_ordering(&full, &latent).is_err());
    }

    #[test]
    fn non_square_latent_falls_back_to_dense_branch() {
        let m = DeepOnetModel::new(DeepOnetConfig::latent(10, 3, 0)).unwrap();
        assert_eq!(m.branch_kind(), BranchKind::Dense);
        let y = m.forward(&random(&[2, 10], 1), &[0.0, 1.0]).unwrap();
        assert_eq!(y.shape(), &[2, 2, 10]);
    }

    #[test]
    fn prediction_is_branch_trunk_dot_product() {
        for cfg in [DeepOnetConfig::latent(16, 4, 3), DeepOnetConfig::full(4, 4, 3, 3)] {
            let mut m = DeepOnetModel::new(cfg).unwrap();
            m.set_b0(0.25);
            let x = random(&[3, 16], 2);
            let zeta = [0.0, 0.3, 0.9];
            let y = m.forward(&x, &zeta).unwrap();
            let b = m.branch_outputs(&x).unwrap();
            let t = m.trunk_outputs(&zeta).unwrap();
            let (p, out) = (m.config.p, 16);
            for bi in 0..3 {
                for k in 0..3 {
                    for j in 0..out {
                        let mut s = 0.0;
                        for i in 0..p {
                            s += match m.config.mode {
                                OperatorMode::Latent => b.data()[bi * out * p + j * p + i] * t.data()[k * p + i],
                                OperatorMode::Full => b.data()[bi * p + i] * t.data()[k * out * p + j * p + i],
                            };
                        }
                        assert_eq!(y.data()[(bi * 3 + k) * out + j], s + 0.25);
                    }
                }
            }
        }
    }

    #[test]
    fn permuting_times_permutes_outputs() {
        let m = DeepOnetModel::new(DeepOnetConfig::latent(9, 5, 4)).unwrap();
        let x = random(&[2, 9], 5);
        let a = m.forward(&x, &[0.1, 0.5, 0.8]).unwrap();
        let b = m.forward(&x, &[0.8, 0.1, 0.5]).unwrap();
        for bi in 0..2 {
            for (ka, kb) in [(0, 1), (1, 2), (2, 0)] {
                assert_eq!(
                    &a.data()[(bi * 3 + ka) * 9..(bi * 3 + ka + 1) * 9],
                    &b.data()[(bi * 3 + kb) * 9..(bi * 3 + kb + 1) * 9]
                );
            }
        }
        let single = m.forward(&x, &[0.5]).unwrap();
        assert_eq!(single.data()[..9], a.data()[9..18]);
    }

    #[test]
    fn rejects_times_outside_unit_interval() {
        let m = DeepOnetModel::new(DeepOnetConfig::latent(4, 2, 0)).unwrap();
        assert!(m.forward(&random(&[1, 4], 0), &[1.5]).is_err());
        assert!(m.forward(&random(&[1, 5], 0), &[0.5]).is_err());
    }

    #[test]
    fn learns_constant_target() {
        let mut m = DeepOnetModel::new(DeepOnetConfig::latent(4, 5, 1)).unwrap();
        let x = random(&[16, 4], 9);
        let zeta = [0.0, 0.5, 1.0];
        let y = Tensor::full(&[16, 3, 4], 0.6);
        let cfg = TrainConfig {
            epochs: 200,
            batch: 8,
            lr: 3e-3,
            seed: 1,
        };
        let log = train_deeponet(&mut m, &x, &y, &zeta, &cfg).unwrap();
        assert!(log.epoch_losses[0] > log.final_loss());
        let pred = m.forward(&x, &zeta).unwrap();
        let mse = crate::dimred::mse(pred.data(), y.data());
        assert!(mse < 1e-4, "{mse}");
    }

    #[test]
    fn training_is_deterministic_and_container_roundtrips() {
        let x = random(&[6, 16], 3);
        let y = random(&[6, 2, 16], 4);
        let zeta = [0.0, 1.0];
        let cfg = TrainConfig {
            epochs: 3,
            batch: 4,
            lr: 1e-3,
            seed: 5,
        };
        let run = || {
            let mut m = DeepOnetModel::new(DeepOnetConfig::latent(16, 3, 2)).unwrap();
            let log = train_deeponet(&mut m, &x, &y, &zeta, &cfg).unwrap();
            (m, log.epoch_losses)
        };
        let (m, a) = run();
        let (_, b) = run();
        assert_eq!(a, b);
        let bytes = m.to_container().to_bytes().unwrap();
        let back = DeepOnetModel::from_container(&Container::from_bytes(&bytes).unwrap()).unwrap();
        assert_eq!(back.forward(&x, &zeta).unwrap(), m.forward(&x, &zeta).unwrap());
    }
}
