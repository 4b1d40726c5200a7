//! Gaussian random fields on the unit square by truncated Karhunen–Loève
//! expansion of a separable squared-exponential covariance.

use crate::error::{Error, Result};
use crate::linalg::sym_eig;
use crate::rng::Normal;

/// Largest grid for which the covariance matrix is assembled densely.
pub const MAX_DENSE_POINTS: usize = 4096;

/// Eigenvalues above this (negative) value are treated as round-off and clipped.
const CLIP_TOLERANCE: f64 = -1e-12;

#[derive(Clone, Debug, PartialEq)]
pub struct GrfConfig {
    pub nx: usize,
    pub ny: usize,
    pub length_scale_x: f64,
    pub length_scale_y: f64,
    pub variance: f64,
    /// Fraction of total variance retained by the truncated expansion.
    pub kle_energy: f64,
    pub seed: u64,
}

impl Default for GrfConfig {
    fn default() -> Self {
        Self {
            nx: 32,
            ny: 32,
            length_scale_x: 0.35,
            length_scale_y: 0.2,
            variance: 0.15,
            kle_energy: 0.99,
            seed: 0,
        }
    }
}

impl GrfConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.length_scale_x > 0.0 && self.length_scale_y > 0.0) {
            return Err(Error::invalid("GRF length scales must be positive"));
        }
        if !(self.kle_energy > 0.0 && self.kle_energy <= 1.0) {
            return Err(Error::invalid(format!(
                "kle_energy {} outside (0, 1]",
                self.kle_energy
            )));
        }
        if !(self.variance >= 0.0) {
            return Err(Error::invalid("GRF variance must be non-negative"));
        }
        if self.nx == 0 || self.ny == 0 {
            return Err(Error::invalid("empty GRF grid"));
        }
        Ok(())
    }

    pub fn points(&self) -> usize {
        self.nx * self.ny
    }

    /// Coordinates of flat grid index `k` (row-major over `(nx, ny)`).
    pub fn coords(&self, k: usize) -> (f64, f64) {
        let (i, j) = (k / self.ny, k % self.ny);
        (i as f64 / self.nx as f64, j as f64 / self.ny as f64)
    }

    pub fn covariance(&self, a: (f64, f64), b: (f64, f64)) -> f64 {
        let dx = a.0 - b.0;
        let dy = a.1 - b.1;
        self.variance
            * (-dx * dx / (2.0 * self.length_scale_x.powi(2))
                - dy * dy / (2.0 * self.length_scale_y.powi(2)))
            .exp()
    }

    /// Dense covariance matrix over all grid points.
    pub fn covariance_matrix(&self) -> Vec<f64> {
        let n = self.points();
        let mut c = vec![0.0; n * n];
        for a in 0..n {
            let pa = self.coords(a);
            for b in a..n {
                let v = self.covariance(pa, self.coords(b));
                c[a * n + b] = v;
                c[b * n + a] = v;
            }
        }
        c
    }
}

/// Retained KLE modes, each scaled by the square root of its eigenvalue.
#[derive(Clone, Debug)]
pub struct KleBasis {
    pub nx: usize,
    pub ny: usize,
    /// Row-major `points × n_modes`.
    pub modes: Vec<f64>,
    /// Retained eigenvalues, descending.
    pub eigenvalues: Vec<f64>,
    pub total_variance: f64,
}

impl KleBasis {
    pub fn n_modes(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn points(&self) -> usize {
        self.nx * self.ny
    }

    /// `Σ ξ_i · mode_i` for caller-supplied coefficients.
    pub fn field_from(&self, xi: &[f64]) -> Vec<f64> {
        let m = self.n_modes();
        assert_eq!(xi.len(), m, "expected {m} KLE coefficients");
        (0..self.points())
            .map(|p| {
                self.modes[p * m..(p + 1) * m]
                    .iter()
                    .zip(xi)
                    .map(|(a, b)| a * b)
                    .sum()
            })
            .collect()
    }

    /// Covariance implied by the truncated expansion, `Σ_i mode_i mode_iᵀ`.
    pub fn implied_covariance(&self) -> Vec<f64> {
        let (n, m) = (self.points(), self.n_modes());
        let mut c = vec![0.0; n * n];
        for a in 0..n {
            for b in 0..n {
                c[a * n + b] = (0..m).map(|k| self.modes[a * m + k] * self.modes[b * m + k]).sum();
            }
        }
        c
    }
}

pub fn build_kle(cfg: &GrfConfig) -> Result<KleBasis> {
    cfg.validate()?;
    let n = cfg.points();
    if n > MAX_DENSE_POINTS {
        return Err(Error::GridTooLarge {
            points: n,
            limit: MAX_DENSE_POINTS,
        });
    }
    let empty = KleBasis {
        nx: cfg.nx,
        ny: cfg.ny,
        modes: Vec::new(),
        eigenvalues: Vec::new(),
        total_variance: 0.0,
    };
    if cfg.variance == 0.0 {
        return Ok(empty);
    }
    let eig = sym_eig(&cfg.covariance_matrix(), n)?;
    let scale = eig.values[0].abs().max(f64::MIN_POSITIVE);
    let mut lambdas = Vec::with_capacity(n);
    for &l in &eig.values {
        if l < CLIP_TOLERANCE * scale * n as f64 {
            return Err(Error::Numeric(format!(
                "covariance eigenvalue {l:e} is not positive semi-definite"
            )));
        }
        lambdas.push(l.max(0.0));
    }
    let total: f64 = lambdas.iter().sum();
    let target = cfg.kle_energy * total;
    let mut kept = 0;
    let mut acc = 0.0;
    while kept < n && (acc < target || kept == 0) {
        acc += lambdas[kept];
        kept += 1;
    }
    let mut modes = vec![0.0; n * kept];
    for k in 0..kept {
        let s = lambdas[k].sqrt();
        for p in 0..n {
            modes[p * kept + k] = eig.vectors[p * n + k] * s;
        }
    }
    Ok(KleBasis {
        modes,
        eigenvalues: lambdas[..kept].to_vec(),
        total_variance: total,
        ..empty
    })
}

/// One realization with i.i.d. standard-normal coefficients drawn from `seed`.
pub fn sample_field(basis: &KleBasis, seed: u64) -> Vec<f64> {
    if basis.n_modes() == 0 {
        return vec![0.0; basis.points()];
    }
    let mut normal = Normal::from_seed(seed);
    let mut xi = vec![0.0; basis.n_modes()];
    normal.fill(&mut xi);
    basis.field_from(&xi)
}
