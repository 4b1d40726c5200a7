//! Periodic diffusion-reaction trajectories `∂u/∂t = D∇²u − r·u`.

use rayon::prelude::*;

use super::{FieldDataset, MinMax};
use crate::error::{Error, Result};
use crate::grf::{build_kle, sample_field, GrfConfig};
use crate::tensor::Tensor;

/// Largest stable `D·Δt / min(Δx, Δy)²` accepted by the explicit scheme.
pub const STABILITY_LIMIT: f64 = 0.2;
pub const MAX_EXTENT: usize = 64;

#[derive(Clone, Debug, PartialEq)]
pub struct DiffusionParams {
    pub diffusivity: f64,
    pub reaction_rate: f64,
    pub t_final: f64,
    pub m_t: usize,
    /// Explicit steps between consecutive snapshots.
    pub steps_per_snapshot: usize,
}

impl Default for DiffusionParams {
    fn default() -> Self {
        Self {
            diffusivity: 0.01,
            reaction_rate: 0.5,
            t_final: 1.0,
            m_t: 10,
            steps_per_snapshot: 16,
        }
    }
}

impl DiffusionParams {
    pub fn dt(&self) -> f64 {
        self.t_final / ((self.m_t - 1) * self.steps_per_snapshot) as f64
    }

    /// Snapshot times `k/(m_t-1)` on the unit interval, starting with the IC.
    pub fn time_coords(&self) -> Vec<f64> {
        (0..self.m_t).map(|k| k as f64 / (self.m_t - 1) as f64).collect()
    }

    pub fn stability_ratio(&self, nx: usize, ny: usize) -> f64 {
        let h = (1.0 / nx as f64).min(1.0 / ny as f64);
        self.diffusivity * self.dt() / (h * h)
    }

    pub fn validate(&self, nx: usize, ny: usize) -> Result<()> {
        if self.m_t < 2 {
            return Err(Error::invalid(format!("need at least 2 snapshots, got {}", self.m_t)));
        }
        if self.steps_per_snapshot == 0 || !(self.t_final > 0.0) {
            return Err(Error::invalid("time stepping needs t_final > 0 and at least one step"));
        }
        if !(self.diffusivity >= 0.0 && self.reaction_rate >= 0.0) {
            return Err(Error::invalid("diffusivity and reaction rate must be non-negative"));
        }
        for e in [nx, ny] {
            if !e.is_power_of_two() || e > MAX_EXTENT {
                return Err(Error::NotPowerOfTwo { extent: e });
            }
        }
        let ratio = self.stability_ratio(nx, ny);
        if ratio > STABILITY_LIMIT {
            return Err(Error::Unstable {
                ratio,
                limit: STABILITY_LIMIT,
            });
        }
        Ok(())
    }
}

/// Snapshots of one trajectory, the first being `ic` itself.
pub fn simulate(ic: &[f64], nx: usize, ny: usize, p: &DiffusionParams) -> Result<Vec<Vec<f64>>> {
    p.validate(nx, ny)?;
    if ic.len() != nx * ny {
        return Err(Error::invalid(format!(
            "initial condition has {} values for a {nx}x{ny} grid",
            ic.len()
        )));
    }
    let dt = p.dt();
    let cx = p.diffusivity * dt * (nx * nx) as f64;
    let cy = p.diffusivity * dt * (ny * ny) as f64;
    let decay = (-p.reaction_rate * dt).exp();
    let mut u = ic.to_vec();
    let mut next = vec![0.0; u.len()];
    let mut out = Vec::with_capacity(p.m_t);
    out.push(u.clone());
    for _ in 1..p.m_t {
        for _ in 0..p.steps_per_snapshot {
            for i in 0..nx {
                let (up, dn) = ((i + nx - 1) % nx, (i + 1) % nx);
                for j in 0..ny {
                    let (lf, rt) = ((j + ny - 1) % ny, (j + 1) % ny);
                    let c = u[i * ny + j];
                    let lap_x = u[up * ny + j] + u[dn * ny + j] - 2.0 * c;
                    let lap_y = u[i * ny + lf] + u[i * ny + rt] - 2.0 * c;
                    next[i * ny + j] = (c + cx * lap_x + cy * lap_y) * decay;
                }
            }
            std::mem::swap(&mut u, &mut next);
        }
        out.push(u.clone());
    }
    Ok(out)
}

#[derive(Clone, Debug, PartialEq)]
pub struct DatasetConfig {
    pub grf: GrfConfig,
    pub n_samples: usize,
    pub pde: DiffusionParams,
    pub train_fraction: f64,
}

impl Default for DatasetConfig {
    fn default() -> Self {
        Self {
            grf: GrfConfig::default(),
            n_samples: 200,
            pde: DiffusionParams::default(),
            train_fraction: 0.9,
        }
    }
}

/// Seed of sample `i` derived from the dataset seed.
pub fn sample_seed(base: u64, i: usize) -> u64 {
    base.wrapping_mul(1_000_003).wrapping_add(i as u64)
}

pub fn generate_diffusion_dataset(cfg: &DatasetConfig) -> Result<FieldDataset> {
    let (nx, ny) = (cfg.grf.nx, cfg.grf.ny);
    cfg.pde.validate(nx, ny)?;
    if cfg.n_samples < 2 {
        return Err(Error::invalid("dataset needs at least 2 samples"));
    }
    if !(cfg.train_fraction > 0.0 && cfg.train_fraction < 1.0) {
        return Err(Error::invalid(format!("train fraction {} outside (0, 1)", cfg.train_fraction)));
    }
    let basis = build_kle(&cfg.grf)?;
    let trajectories: Vec<(Vec<f64>, Vec<Vec<f64>>)> = (0..cfg.n_samples)
        .into_par_iter()
        .map(|i| {
            let ic = sample_field(&basis, sample_seed(cfg.grf.seed, i));
            let snaps = simulate(&ic, nx, ny, &cfg.pde)?;
            Ok((ic, snaps))
        })
        .collect::<Result<_>>()?;

    let n = cfg.n_samples;
    let n_train = ((n as f64 * cfg.train_fraction).round() as usize).clamp(1, n - 1);
    let points = nx * ny;
    let m_t = cfg.pde.m_t;
    let mut inputs = Vec::with_capacity(n * points);
    let mut outputs = Vec::with_capacity(n * m_t * points);
    for (ic, snaps) in &trajectories {
        inputs.extend_from_slice(ic);
        for s in snaps {
            outputs.extend_from_slice(s);
        }
    }
    let input_norm = MinMax::fit(&inputs[..n_train * points]);
    let output_norm = MinMax::fit(&outputs[..n_train * m_t * points]);
    input_norm.normalize_in_place(&mut inputs);
    output_norm.normalize_in_place(&mut outputs);
    Ok(FieldDataset {
        nx,
        ny,
        time: cfg.pde.time_coords(),
        inputs: Tensor::new(&[n, points], inputs)?,
        outputs: Tensor::new(&[n, m_t, points], outputs)?,
        input_norm,
        output_norm,
        n_train,
    })
}
