//! Analytic initial conditions: a barotropic zonal jet with its balanced
//! height and a localized bump, and the phase-field strain history of a
//! pre-existing crack.

use std::f64::consts::{FRAC_PI_2, PI};

use rand::Rng;

use crate::error::{Error, Result};
use crate::linalg::GaussLegendre;

/// Earth radius in metres.
pub const EARTH_RADIUS: f64 = 6.37122e6;
/// Gravitational acceleration in m/s².
pub const GRAVITY: f64 = 9.80616;
/// Earth rotation rate in 1/s.
pub const ROTATION_RATE: f64 = 7.292e-5;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct JetParams {
    pub u_max: f64,
    pub phi0: f64,
    pub phi1: f64,
}

impl JetParams {
    pub fn new(u_max: f64, phi0: f64, phi1: f64) -> Result<Self> {
        let p = Self { u_max, phi0, phi1 };
        p.validate()?;
        Ok(p)
    }

    /// The mid-latitude jet used for the barotropic instability test.
    pub fn galewsky() -> Self {
        Self {
            u_max: 80.0,
            phi0: PI / 7.0,
            phi1: FRAC_PI_2 - PI / 7.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.phi0 < self.phi1) {
            return Err(Error::invalid(format!(
                "jet needs phi0 < phi1, got {} and {}",
                self.phi0, self.phi1
            )));
        }
        Ok(())
    }

    /// `exp(-4 / (φ₁ - φ₀)²)`, which puts `u_max` at the jet midpoint.
    pub fn normalizer(&self) -> f64 {
        (-4.0 / (self.phi1 - self.phi0).powi(2)).exp()
    }

    pub fn u(&self, phi: f64) -> f64 {
        if phi <= self.phi0 || phi >= self.phi1 {
            return 0.0;
        }
        self.u_max / self.normalizer() * (1.0 / ((phi - self.phi0) * (phi - self.phi1))).exp()
    }
}

pub fn zonal_jet_u(phis: &[f64], p: &JetParams) -> Result<Vec<f64>> {
    p.validate()?;
    check_latitudes(phis)?;
    Ok(phis.iter().map(|&phi| p.u(phi)).collect())
}

fn check_latitudes(phis: &[f64]) -> Result<()> {
    if let Some(bad) = phis.iter().find(|p| !(-FRAC_PI_2..=FRAC_PI_2).contains(*p)) {
        return Err(Error::invalid(format!("latitude {bad} outside [-π/2, π/2]")));
    }
    Ok(())
}

/// `n` latitudes `-π/2 + kπ/n`.
pub fn latitude_grid(n: usize) -> Vec<f64> {
    (0..n).map(|k| -FRAC_PI_2 + k as f64 * PI / n as f64).collect()
}

/// `n` cell-centred longitudes in `(-π, π)`, symmetric about zero.
pub fn longitude_grid(n: usize) -> Vec<f64> {
    let mut out: Vec<f64> = (0..n).map(|k| -PI + (k as f64 + 0.5) * 2.0 * PI / n as f64).collect();
    // Mirror the western half so the grid is exactly symmetric.
    for k in 0..n / 2 {
        out[n - 1 - k] = -out[k];
    }
    out
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PerturbParams {
    pub h_hat: f64,
    pub phi2: f64,
    pub alpha: f64,
    pub beta: f64,
}

impl PerturbParams {
    pub const ALPHA_RANGE: (f64, f64) = (1.0 / 9.0, 0.5);
    pub const BETA_RANGE: (f64, f64) = (1.0 / 30.0, 0.2);

    pub fn galewsky() -> Self {
        Self {
            h_hat: 120.0,
            phi2: PI / 4.0,
            alpha: 1.0 / 3.0,
            beta: 1.0 / 15.0,
        }
    }

    /// Default amplitude and centre with random shape parameters.
    pub fn sample(rng: &mut impl Rng) -> Self {
        let (a0, a1) = Self::ALPHA_RANGE;
        let (b0, b1) = Self::BETA_RANGE;
        Self {
            alpha: rng.gen_range(a0..=a1),
            beta: rng.gen_range(b0..=b1),
            ..Self::galewsky()
        }
    }

    pub fn at(&self, lambda: f64, phi: f64) -> f64 {
        self.h_hat
            * phi.cos()
            * (-(lambda / self.alpha).powi(2)).exp()
            * (-((self.phi2 - phi) / self.beta).powi(2)).exp()
    }
}

/// Bump on a `(latitude, longitude)` grid, row-major with latitude rows.
pub fn height_perturbation(lambdas: &[f64], phis: &[f64], p: &PerturbParams) -> Result<Vec<f64>> {
    if !(p.alpha > 0.0 && p.beta > 0.0) {
        return Err(Error::invalid(format!(
            "perturbation shape needs alpha, beta > 0, got {} and {}",
            p.alpha, p.beta
        )));
    }
    if let Some(bad) = lambdas.iter().find(|l| !(l.abs() < PI)) {
        return Err(Error::invalid(format!("longitude {bad} outside (-π, π)")));
    }
    check_latitudes(phis)?;
    let mut out = Vec::with_capacity(lambdas.len() * phis.len());
    for &phi in phis {
        out.extend(lambdas.iter().map(|&l| p.at(l, phi)));
    }
    Ok(out)
}

/// Height in geostrophic balance with the jet, shifted so the area-weighted
/// mean over `phis` equals `mean_depth`. `phis` must be ascending.
pub fn balanced_height(phis: &[f64], jet: &JetParams, mean_depth: f64, nodes: usize) -> Result<Vec<f64>> {
    jet.validate()?;
    check_latitudes(phis)?;
    if phis.is_empty() {
        return Err(Error::invalid("empty latitude grid"));
    }
    if phis.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::invalid("latitudes must be strictly ascending"));
    }
    let rule = GaussLegendre::new(nodes)?;
    let integrand = |phi: f64| {
        let u = jet.u(phi);
        let f = 2.0 * ROTATION_RATE * phi.sin();
        EARTH_RADIUS * u * (f + phi.tan() * u / EARTH_RADIUS)
    };
    // Cumulative ∫_{-π/2}^{φ_k}, one quadrature per grid interval.
    let mut cumulative = Vec::with_capacity(phis.len());
    let mut acc = 0.0;
    let mut lo = -FRAC_PI_2;
    for &phi in phis {
        if phi > lo {
            acc += rule.integrate(integrand, lo, phi);
        }
        if !acc.is_finite() {
            return Err(Error::Numeric(format!("balance integral diverged at latitude {phi}")));
        }
        cumulative.push(acc / GRAVITY);
        lo = phi;
    }
    let weights: Vec<f64> = phis.iter().map(|p| p.cos().max(0.0)).collect();
    let wsum: f64 = weights.iter().sum();
    if !(wsum > 0.0) {
        return Err(Error::invalid("latitude grid has zero area weight"));
    }
    let mean_drop = cumulative.iter().zip(&weights).map(|(c, w)| c * w).sum::<f64>() / wsum;
    let h0 = mean_depth + mean_drop;
    Ok(cumulative.iter().map(|c| h0 - c).collect())
}

/// Area-weighted (cos φ) mean of a zonal profile.
pub fn area_weighted_mean(phis: &[f64], values: &[f64]) -> f64 {
    let w: Vec<f64> = phis.iter().map(|p| p.cos().max(0.0)).collect();
    w.iter().zip(values).map(|(w, v)| w * v).sum::<f64>() / w.iter().sum::<f64>()
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CrackParams {
    pub y_c: f64,
    pub l_c: f64,
    /// Left end of the crack; 0 gives an edge notch.
    pub x_start: f64,
    pub l0: f64,
    pub b: f64,
    pub gc: f64,
}

impl CrackParams {
    pub const Y_RANGE: (f64, f64) = (0.3, 0.7);
    pub const LENGTH_RANGE: (f64, f64) = (0.4, 0.6);

    pub fn new(y_c: f64, l_c: f64) -> Self {
        Self {
            y_c,
            l_c,
            x_start: 0.0,
            l0: 0.0125,
            b: 1e3,
            gc: 2.7e-3,
        }
    }

    pub fn sample(rng: &mut impl Rng) -> Self {
        let (y0, y1) = Self::Y_RANGE;
        let (l0, l1) = Self::LENGTH_RANGE;
        let y = rng.gen_range(y0..=y1);
        let l = rng.gen_range(l0..=l1);
        Self::new(y, l)
    }

    /// Distance from `(x, y)` to the crack segment.
    pub fn distance(&self, x: f64, y: f64) -> f64 {
        let cx = x.clamp(self.x_start, self.x_start + self.l_c);
        ((x - cx).powi(2) + (y - self.y_c).powi(2)).sqrt()
    }

    pub fn history_at(&self, x: f64, y: f64) -> f64 {
        let d = self.distance(x, y);
        if d <= 0.5 * self.l0 {
            self.b * self.gc / (2.0 * self.l0) * (1.0 - 2.0 * d / self.l0)
        } else {
            0.0
        }
    }
}

/// Strain history on an `nx × ny` grid spanning the closed unit square,
/// row-major with `x` along rows.
pub fn strain_history(nx: usize, ny: usize, c: &CrackParams) -> Result<Vec<f64>> {
    if !(c.l0 > 0.0) {
        return Err(Error::invalid("length scale l0 must be positive"));
    }
    if nx < 2 || ny < 2 {
        return Err(Error::invalid("strain history grid needs at least 2 points per axis"));
    }
    let mut out = Vec::with_capacity(nx * ny);
    for i in 0..nx {
        let x = i as f64 / (nx - 1) as f64;
        for j in 0..ny {
            let y = j as f64 / (ny - 1) as f64;
            out.push(c.history_at(x, y));
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn jet_midpoint_and_edges() {
        let p = JetParams::galewsky();
        let mid = 0.5 * (p.phi0 + p.phi1);
        assert!((p.u(mid) - 80.0).abs() < 1e-12);
        assert_eq!(p.u(p.phi0 - 0.1), 0.0);
        assert_eq!(p.u(p.phi1 + 0.1), 0.0);
        assert!(p.u(p.phi0 + 1e-3) < 1e-100);
        assert!(JetParams::new(1.0, 0.5, 0.5).is_err());
    }

    #[test]
    fn jet_profile_peak_on_fine_grid() {
        let p = JetParams::galewsky();
        let u = zonal_jet_u(&latitude_grid(256), &p).unwrap();
        let max = u.iter().cloned().fold(f64::MIN, f64::max);
        assert!((max - 80.0).abs() < 1e-6, "{max}");
    }

    #[test]
    fn perturbation_values_and_symmetry() {
        let p = PerturbParams::galewsky();
        let peak = p.h_hat * p.phi2.cos();
        assert!((p.at(0.0, p.phi2) - peak).abs() < 1e-12);
        let three = p.at(3.0 * p.alpha, p.phi2);
        assert!((three - peak * (-9.0f64).exp()).abs() < 1e-12);
        let lam = longitude_grid(32);
        let phi = latitude_grid(16);
        let h = height_perturbation(&lam, &phi, &p).unwrap();
        for r in 0..16 {
            for c in 0..32 {
                assert_eq!(h[r * 32 + c], h[r * 32 + 31 - c]);
            }
        }
        let bad = PerturbParams { alpha: 0.0, ..p };
        assert!(height_perturbation(&lam, &phi, &bad).is_err());
    }

    #[test]
    fn sampled_shapes_stay_in_range() {
        let mut rng = crate::rng::seeded(5);
        for _ in 0..100 {
            let p = PerturbParams::sample(&mut rng);
            assert!((1.0 / 9.0..=0.5).contains(&p.alpha));
            assert!((1.0 / 30.0..=0.2).contains(&p.beta));
            let c = CrackParams::sample(&mut rng);
            assert!((0.3..=0.7).contains(&c.y_c) && (0.4..=0.6).contains(&c.l_c));
        }
    }

    #[test]
    fn balanced_height_without_flow_is_flat() {
        let phis = latitude_grid(32);
        let still = JetParams { u_max: 0.0, ..JetParams::galewsky() };
        let h = balanced_height(&phis, &still, 10_000.0, 8).unwrap();
        assert!(h.iter().all(|&v| (v - 10_000.0).abs() < 1e-9));
    }

    #[test]
    fn balanced_height_mean_and_refinement() {
        let phis = latitude_grid(64);
        let jet = JetParams::galewsky();
        let h = balanced_height(&phis, &jet, 10_000.0, 8).unwrap();
        assert!((area_weighted_mean(&phis, &h) - 10_000.0).abs() < 1e-6);
        let fine = balanced_height(&phis, &jet, 10_000.0, 16).unwrap();
        for (a, b) in h.iter().zip(&fine) {
            assert!((a - b).abs() < 1e-6 * b.abs());
        }
        // Geostrophic balance lowers the surface poleward of the jet.
        assert!(h[63] < h[32]);
    }

    #[test]
    fn strain_history_values() {
        let c = CrackParams::new(0.5, 0.5);
        assert!((c.history_at(0.25, 0.5) - 108.0).abs() < 1e-12);
        let wide = CrackParams { l0: 0.125, ..c };
        assert_eq!(wide.history_at(0.25, 0.5625), 0.0);
        assert!(wide.history_at(0.25, 0.56) > 0.0);
        assert_eq!(c.history_at(0.25, 0.6), 0.0);
        assert_eq!(c.history_at(0.9, 0.5), 0.0);
        let h = strain_history(5, 5, &c).unwrap();
        assert_eq!(h.len(), 25);
        assert!((h[2] - 108.0).abs() < 1e-12);
        assert_eq!(h, strain_history(5, 5, &c).unwrap());
    }
}
