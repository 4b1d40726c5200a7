//! Invertible dimension reduction of field snapshots: a dense multi-layer
//! autoencoder and PCA.

use std::fmt;
use std::path::Path;
use std::str::FromStr;

use crate::datagen::{FieldDataset, MinMax};
use crate::error::{Error, Result};
use crate::linalg::truncated_svd;
use crate::pipeline::container::{Container, Manifest};
use crate::rng::{derived, permutation};
use crate::tensor::{Activation, Adam, Dense, ParamStore, Tape, Tensor};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SnapshotMode {
    Combined,
    OutputsOnly,
    InputsOnly,
}

/// Flattened snapshots, one row per input field or output time slice.
#[derive(Clone, Debug, PartialEq)]
pub struct SnapshotSet {
    pub nx: usize,
    pub ny: usize,
    /// `[rows, nx·ny]`.
    pub z: Tensor,
    pub input_norm: MinMax,
    pub output_norm: MinMax,
}

impl SnapshotSet {
    /// Wraps pre-normalized rows.
    pub fn from_rows(z: Tensor, nx: usize, ny: usize) -> Result<Self> {
        if z.rank() != 2 || z.shape()[1] != nx * ny {
            return Err(Error::invalid(format!(
                "snapshot matrix {:?} does not match a {nx}x{ny} grid",
                z.shape()
            )));
        }
        let unit = MinMax { min: 0.0, max: 1.0 };
        Ok(Self {
            nx,
            ny,
            z,
            input_norm: unit,
            output_norm: unit,
        })
    }

    pub fn rows(&self) -> usize {
        self.z.shape()[0]
    }

    pub fn dim(&self) -> usize {
        self.z.shape()[1]
    }
}

/// Stacks inputs (first) and every output time slice into snapshot rows.
pub fn assemble_snapshots(ds: &FieldDataset, mode: SnapshotMode) -> SnapshotSet {
    let mut rows = Vec::new();
    if mode != SnapshotMode::OutputsOnly {
        rows.extend_from_slice(ds.inputs.data());
    }
    if mode != SnapshotMode::InputsOnly {
        rows.extend_from_slice(ds.outputs.data());
    }
    let dim = ds.points();
    let n = rows.len() / dim;
    SnapshotSet {
        nx: ds.nx,
        ny: ds.ny,
        z: Tensor::new(&[n, dim], rows).expect("snapshot rows"),
        input_norm: ds.input_norm,
        output_norm: ds.output_norm,
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ReducerKind {
    Mlae,
    Pca,
}

impl fmt::Display for ReducerKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ReducerKind::Mlae => "mlae",
            ReducerKind::Pca => "pca",
        })
    }
}

impl FromStr for ReducerKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "mlae" => Ok(ReducerKind::Mlae),
            "pca" => Ok(ReducerKind::Pca),
            other => Err(Error::invalid(format!("unknown reducer kind '{other}'"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct MlaeConfig {
    pub latent_dim: usize,
    /// Encoder widths from the input down to the latent; `None` uses [`mlae_widths`].
    pub widths: Option<Vec<usize>>,
    pub epochs: usize,
    pub batch: usize,
    pub lr: f64,
    pub seed: u64,
}

impl MlaeConfig {
    pub fn new(latent_dim: usize, seed: u64) -> Self {
        Self {
            latent_dim,
            widths: None,
            epochs: 200,
            batch: 32,
            lr: 1e-3,
            seed,
        }
    }
}

/// Encoder widths `[dim, h1, h2, h3, d]` interpolated geometrically.
pub fn mlae_widths(dim: usize, d: usize) -> Vec<usize> {
    let ratio = d as f64 / dim as f64;
    let mut w = vec![dim];
    for k in 1..=3 {
        w.push((dim as f64 * ratio.powf(k as f64 / 4.0)).round() as usize);
    }
    w.push(d);
    w
}

#[derive(Clone, Debug)]
struct Mlae {
    store: ParamStore,
    encoder: Vec<Dense>,
    decoder: Vec<Dense>,
    widths: Vec<usize>,
}

impl Mlae {
    fn build(widths: &[usize], seed: u64) -> Self {
        let mut rng = derived(seed, 0x6d6c6165);
        let mut store = ParamStore::new();
        let depth = widths.len() - 1;
        let encoder = (0..depth)
            .map(|i| {
                Dense::new(&mut store, &mut rng, &format!("enc{i}"), widths[i], widths[i + 1], Activation::Relu)
            })
            .collect();
        let decoder = (0..depth)
            .map(|i| {
                let (a, b) = (widths[depth - i], widths[depth - i - 1]);
                let act = if i + 1 == depth {
                    Activation::Sigmoid
                } else {
                    Activation::Relu
                };
                Dense::new(&mut store, &mut rng, &format!("dec{i}"), a, b, act)
            })
            .collect();
        Self {
            store,
            encoder,
            decoder,
            widths: widths.to_vec(),
        }
    }

    fn run(&self, layers: &[Dense], x: &Tensor) -> Result<Tensor> {
        let mut tape = Tape::new();
        let p = self.store.bind(&mut tape);
        let mut h = tape.constant(x.clone());
        for l in layers {
            h = l.forward(&mut tape, &p, h)?;
        }
        Ok(tape.value(h).clone())
    }
}

#[derive(Clone, Debug)]
struct Pca {
    /// `dim × d`, orthonormal columns.
    basis: Tensor,
    mean: Vec<f64>,
    singular_values: Vec<f64>,
    dropped: Vec<f64>,
}

#[derive(Clone, Debug)]
enum Inner {
    Mlae(Mlae),
    Pca(Pca),
}

#[derive(Clone, Debug)]
pub struct ReducerModel {
    pub nx: usize,
    pub ny: usize,
    pub latent_dim: usize,
    pub input_norm: MinMax,
    pub output_norm: MinMax,
    /// Per-epoch reconstruction loss (MLAE) or the single fitted MSE (PCA).
    pub log: Vec<f64>,
    inner: Inner,
}

impl ReducerModel {
    pub fn kind(&self) -> ReducerKind {
        match self.inner {
            Inner::Mlae(_) => ReducerKind::Mlae,
            Inner::Pca(_) => ReducerKind::Pca,
        }
    }

    pub fn dim(&self) -> usize {
        self.nx * self.ny
    }

    /// Encoder widths for an MLAE.
    pub fn widths(&self) -> Option<&[usize]> {
        match &self.inner {
            Inner::Mlae(m) => Some(&m.widths),
            Inner::Pca(_) => None,
        }
    }

    /// PCA basis `dim × d`.
    pub fn basis(&self) -> Option<&Tensor> {
        match &self.inner {
            Inner::Pca(p) => Some(&p.basis),
            Inner::Mlae(_) => None,
        }
    }

    pub fn mean(&self) -> Option<&[f64]> {
        match &self.inner {
            Inner::Pca(p) => Some(&p.mean),
            Inner::Mlae(_) => None,
        }
    }

    /// Singular values beyond the retained `d` (PCA).
    pub fn dropped_singular_values(&self) -> Option<&[f64]> {
        match &self.inner {
            Inner::Pca(p) => Some(&p.dropped),
            Inner::Mlae(_) => None,
        }
    }

    pub fn param_count(&self) -> usize {
        match &self.inner {
            Inner::Mlae(m) => m.store.count(),
            Inner::Pca(p) => p.basis.len() + p.mean.len(),
        }
    }

    /// `[n, dim] → [n, d]`.
    pub fn encode(&self, fields: &Tensor) -> Result<Tensor> {
        if fields.rank() != 2 || fields.shape()[1] != self.dim() {
            return Err(Error::Shape {
                op: "encode",
                lhs: fields.shape().to_vec(),
                rhs: vec![self.dim()],
            });
        }
        match &self.inner {
            Inner::Mlae(m) => m.run(&m.encoder, fields),
            Inner::Pca(p) => {
                let n = fields.shape()[0];
                let mut centered = fields.clone();
                for row in centered.data_mut().chunks_mut(self.dim()) {
                    row.iter_mut().zip(&p.mean).for_each(|(v, m)| *v -= m);
                }
                let mut out = vec![0.0; n * self.latent_dim];
                crate::tensor::kernels::matmul(
                    centered.data(),
                    p.basis.data(),
                    n,
                    self.dim(),
                    self.latent_dim,
                    false,
                    false,
                    &mut out,
                    false,
                );
                Tensor::new(&[n, self.latent_dim], out)
            }
        }
    }

    /// `[n, d] → [n, dim]`.
    pub fn decode(&self, latents: &Tensor) -> Result<Tensor> {
        if latents.rank() != 2 || latents.shape()[1] != self.latent_dim {
            return Err(Error::Shape {
                op: "decode",
                lhs: latents.shape().to_vec(),
                rhs: vec![self.latent_dim],
            });
        }
        match &self.inner {
            Inner::Mlae(m) => m.run(&m.decoder, latents),
            Inner::Pca(p) => {
                let n = latents.shape()[0];
                let mut out = vec![0.0; n * self.dim()];
                crate::tensor::kernels::matmul(
                    latents.data(),
                    p.basis.data(),
                    n,
                    self.latent_dim,
                    self.dim(),
                    false,
                    true,
                    &mut out,
                    false,
                );
                for row in out.chunks_mut(self.dim()) {
                    row.iter_mut().zip(&p.mean).for_each(|(v, m)| *v += m);
                }
                Tensor::new(&[n, self.dim()], out)
            }
        }
    }

    /// Mean squared reconstruction error over all rows and coordinates.
    pub fn reconstruction_mse(&self, fields: &Tensor) -> Result<f64> {
        let rec = self.decode(&self.encode(fields)?)?;
        Ok(mse(rec.data(), fields.data()))
    }

    pub fn to_container(&self) -> Container {
        let mut m = Manifest::new();
        m.set("kind", self.kind())
            .set("d", self.latent_dim)
            .set("nx", self.nx)
            .set("ny", self.ny)
            .set("input_min", fmt_f64(self.input_norm.min))
            .set("input_max", fmt_f64(self.input_norm.max))
            .set("output_min", fmt_f64(self.output_norm.min))
            .set("output_max", fmt_f64(self.output_norm.max));
        let mut c = Container::new(m);
        c.push("log", vec_tensor(&self.log));
        match &self.inner {
            Inner::Mlae(mlae) => {
                let widths: Vec<String> = mlae.widths.iter().map(|w| w.to_string()).collect();
                c.manifest.set("widths", widths.join(","));
                for (name, t) in mlae.store.iter() {
                    c.push(name, t.clone());
                }
            }
            Inner::Pca(p) => {
                c.push("basis", p.basis.clone());
                c.push("mean", vec_tensor(&p.mean));
                c.push("singular_values", vec_tensor(&p.singular_values));
                c.push("dropped", vec_tensor(&p.dropped));
            }
        }
        c
    }

    pub fn from_container(c: &Container) -> Result<Self> {
        let m = &c.manifest;
        let kind: ReducerKind = m.parse::<String>("kind")?.parse()?;
        let latent_dim = m.parse("d")?;
        let (nx, ny) = (m.parse("nx")?, m.parse("ny")?);
        let inner = match kind {
            ReducerKind::Mlae => {
                let widths: Vec<usize> = m
                    .parse::<String>("widths")?
                    .split(',')
                    .map(|w| w.parse().map_err(|_| Error::invalid("malformed widths")))
                    .collect::<Result<_>>()?;
                let mut mlae = Mlae::build(&widths, 0);
                mlae.store.load(|name| c.get(name).ok())?;
                Inner::Mlae(mlae)
            }
            ReducerKind::Pca => Inner::Pca(Pca {
                basis: c.get("basis")?.clone(),
                mean: tensor_vec(c.get("mean")?),
                singular_values: tensor_vec(c.get("singular_values")?),
                dropped: c.get("dropped").map(tensor_vec).unwrap_or_default(),
            }),
        };
        Ok(Self {
            nx,
            ny,
            latent_dim,
            input_norm: MinMax {
                min: m.parse("input_min")?,
                max: m.parse("input_max")?,
            },
            output_norm: MinMax {
                min: m.parse("output_min")?,
                max: m.parse("output_max")?,
            },
            log: c.get("log").map(tensor_vec).unwrap_or_default(),
            inner,
        })
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        self.to_container().write(path)
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_container(&Container::read(path)?)
    }
}

pub(crate) fn fmt_f64(v: f64) -> String {
    format!("{v:?}")
}

/// Rank-1 tensor of `v`; an empty vector is stored as a rank-0 placeholder.
pub(crate) fn vec_tensor(v: &[f64]) -> Tensor {
    if v.is_empty() {
        Tensor::scalar(0.0)
    } else {
        Tensor::new(&[v.len()], v.to_vec()).expect("vector")
    }
}

pub(crate) fn tensor_vec(t: &Tensor) -> Vec<f64> {
    if t.rank() == 0 {
        Vec::new()
    } else {
        t.data().to_vec()
    }
}

pub(crate) fn mse(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).powi(2)).sum::<f64>() / a.len() as f64
}

fn check_latent(d: usize, snaps: &SnapshotSet) -> Result<()> {
    if d == 0 || d >= snaps.dim() {
        return Err(Error::invalid(format!(
            "latent dimension {d} must lie in 1..{}",
            snaps.dim()
        )));
    }
    Ok(())
}

pub fn fit_mlae(snaps: &SnapshotSet, cfg: &MlaeConfig) -> Result<ReducerModel> {
    let d = cfg.latent_dim;
    check_latent(d, snaps)?;
    if let Some(bad) = snaps.z.data().iter().find(|v| !(-1e-12..=1.0 + 1e-12).contains(*v)) {
        return Err(Error::invalid(format!(
            "autoencoder data must be normalized to [0, 1], found {bad}"
        )));
    }
    let widths = cfg.widths.clone().unwrap_or_else(|| mlae_widths(snaps.dim(), d));
    if widths.first() != Some(&snaps.dim()) || widths.last() != Some(&d) || widths.len() < 2 {
        return Err(Error::invalid(format!(
            "widths {widths:?} must run from {} to {d}",
            snaps.dim()
        )));
    }
    if cfg.batch == 0 || cfg.epochs == 0 {
        return Err(Error::invalid("epochs and batch size must be positive"));
    }
    let mut model = Mlae::build(&widths, cfg.seed);
    let mut opt = Adam::new(cfg.lr);
    let mut shuffle = derived(cfg.seed, 0x73687566);
    let rows = snaps.rows();
    let mut log = Vec::with_capacity(cfg.epochs);
    for epoch in 0..cfg.epochs {
        let order = permutation(&mut shuffle, rows);
        let mut total = 0.0;
        for chunk in order.chunks(cfg.batch) {
            let batch = snaps.z.select_rows(chunk);
            let mut tape = Tape::new();
            let p = model.store.bind(&mut tape);
            let x = tape.constant(batch);
            let mut h = x;
            for l in model.encoder.iter().chain(&model.decoder) {
                h = l.forward(&mut tape, &p, h)?;
            }
            let loss = tape.mse(h, x)?;
            let value = tape.value(loss).item();
            if !value.is_finite() {
                return Err(Error::Numeric(format!("autoencoder loss is {value} at epoch {epoch}")));
            }
            total += value * chunk.len() as f64;
            let grads = tape.backward(loss)?;
            let g: Vec<Option<Tensor>> = p.vars().iter().map(|&v| Some(grads.get(v))).collect();
            opt.step(&mut model.store, &g)?;
        }
        let epoch_loss = total / rows as f64;
        log::debug!("mlae d={d} epoch {epoch}: {epoch_loss:.6e}");
        log.push(epoch_loss);
    }
    Ok(ReducerModel {
        nx: snaps.nx,
        ny: snaps.ny,
        latent_dim: d,
        input_norm: snaps.input_norm,
        output_norm: snaps.output_norm,
        log,
        inner: Inner::Mlae(model),
    })
}

pub fn fit_pca(snaps: &SnapshotSet, d: usize) -> Result<ReducerModel> {
    check_latent(d, snaps)?;
    let (rows, dim) = (snaps.rows(), snaps.dim());
    if d > rows {
        return Err(Error::invalid(format!("latent dimension {d} exceeds {rows} snapshots")));
    }
    let mut mean = vec![0.0; dim];
    for row in snaps.z.data().chunks(dim) {
        mean.iter_mut().zip(row).for_each(|(m, v)| *m += v);
    }
    mean.iter_mut().for_each(|m| *m /= rows as f64);
    let mut centered = snaps.z.data().to_vec();
    for row in centered.chunks_mut(dim) {
        row.iter_mut().zip(&mean).for_each(|(v, m)| *v -= m);
    }
    let svd = truncated_svd(&centered, rows, dim, d)?;
    let fitted = svd.residual_sq() / (rows * dim) as f64;
    Ok(ReducerModel {
        nx: snaps.nx,
        ny: snaps.ny,
        latent_dim: d,
        input_norm: snaps.input_norm,
        output_norm: snaps.output_norm,
        log: vec![fitted],
        inner: Inner::Pca(Pca {
            basis: Tensor::new(&[dim, d], svd.v)?,
            mean,
            singular_values: svd.s,
            dropped: svd.dropped,
        }),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::Normal;

    fn random_snaps(rows: usize, nx: usize, ny: usize, seed: u64) -> SnapshotSet {
        let mut g = Normal::from_seed(seed);
        let z = Tensor::from_fn(&[rows, nx * ny], |_| 0.5 + 0.1 * g.sample());
        SnapshotSet::from_rows(z, nx, ny).unwrap()
    }

    #[test]
    fn widths_are_geometric() {
        assert_eq!(mlae_widths(1024, 64), vec![1024, 512, 256, 128, 64]);
        assert_eq!(mlae_widths(1024, 16), vec![1024, 362, 128, 45, 16]);
    }

    #[test]
    fn pca_full_rank_roundtrip_and_mean() {
        let s = random_snaps(10, 4, 4, 1);
        let m = fit_pca(&s, 10).unwrap();
        let rec = m.decode(&m.encode(&s.z).unwrap()).unwrap();
        assert!(rec.max_abs_diff(&s.z) < 1e-8);
        let mean = Tensor::new(&[1, 16], m.mean().unwrap().to_vec()).unwrap();
        assert!(m.encode(&mean).unwrap().data().iter().all(|v| v.abs() < 1e-10));
    }

    #[test]
    fn pca_basis_orthonormal_and_projection_idempotent() {
        let s = random_snaps(30, 4, 5, 2);
        let m = fit_pca(&s, 6).unwrap();
        let b = m.basis().unwrap();
        for i in 0..6 {
            for j in 0..6 {
                let dot: f64 = (0..20).map(|r| b.data()[r * 6 + i] * b.data()[r * 6 + j]).sum();
                assert!((dot - if i == j { 1.0 } else { 0.0 }).abs() < 1e-10);
            }
        }
        let once = m.decode(&m.encode(&s.z).unwrap()).unwrap();
        let twice = m.decode(&m.encode(&once).unwrap()).unwrap();
        assert!(once.max_abs_diff(&twice) < 1e-10);
    }

    #[test]
    fn pca_error_matches_dropped_values_and_decreases_with_d() {
        let s = random_snaps(40, 5, 5, 3);
        let mut prev = f64::INFINITY;
        for d in [2, 5, 10, 20] {
            let m = fit_pca(&s, d).unwrap();
            let err = m.reconstruction_mse(&s.z).unwrap();
            let oracle: f64 = m.dropped_singular_values().unwrap().iter().map(|v| v * v).sum::<f64>() / (40.0 * 25.0);
            assert!((err - oracle).abs() <= 1e-8 * oracle);
            assert!(err <= prev);
            prev = err;
        }
    }

    #[test]
    fn rejects_bad_dimensions() {
        let s = random_snaps(5, 2, 2, 4);
        assert!(fit_pca(&s, 4).is_err());
        assert!(fit_pca(&s, 0).is_err());
        let m = fit_pca(&s, 2).unwrap();
        assert!(m.decode(&Tensor::zeros(&[1, 3])).is_err());
        assert!(m.encode(&Tensor::zeros(&[1, 3])).is_err());
    }

    #[test]
    fn mlae_rejects_unnormalized_data() {
        let z = Tensor::full(&[4, 4], 2.0);
        let s = SnapshotSet::from_rows(z, 2, 2).unwrap();
        assert!(fit_mlae(&s, &MlaeConfig::new(2, 0)).is_err());
    }

    #[test]
    fn mlae_memorizes_constant_snapshot_deterministically() {
        let row: Vec<f64> = (0..16).map(|i| 0.2 + 0.03 * i as f64).collect();
        let z = Tensor::from_fn(&[50, 16], |i| row[i % 16]);
        let s = SnapshotSet::from_rows(z, 4, 4).unwrap();
        let cfg = MlaeConfig {
            epochs: 150,
            batch: 10,
            lr: 3e-3,
            ..MlaeConfig::new(15, 7)
        };
        let m = fit_mlae(&s, &cfg).unwrap();
        assert!(m.reconstruction_mse(&s.z).unwrap() < 1e-4);
        assert_eq!(m.encode(&s.z).unwrap().shape(), &[50, 15]);
        let again = fit_mlae(&s, &cfg).unwrap();
        assert_eq!(m.log.last(), again.log.last());
    }

    #[test]
    fn batch_encode_matches_rows() {
        let s = random_snaps(6, 3, 3, 5);
        let m = fit_mlae(&s, &MlaeConfig { epochs: 2, ..MlaeConfig::new(4, 1) }).unwrap();
        let all = m.encode(&s.z).unwrap();
        for r in 0..6 {
            let one = m.encode(&s.z.select_rows(&[r])).unwrap();
            for (a, b) in one.data().iter().zip(all.row(r)) {
                assert!((a - b).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn container_roundtrip_preserves_behaviour() {
        let s = random_snaps(12, 3, 3, 6);
        for m in [
            fit_pca(&s, 3).unwrap(),
            fit_mlae(&s, &MlaeConfig { epochs: 2, ..MlaeConfig::new(3, 2) }).unwrap(),
        ] {
            let back = ReducerModel::from_container(&Container::from_bytes(&m.to_container().to_bytes().unwrap()).unwrap()).unwrap();
            assert_eq!(back.kind(), m.kind());
            assert_eq!(back.log, m.log);
            assert_eq!(back.encode(&s.z).unwrap(), m.encode(&s.z).unwrap());
        }
    }
}
