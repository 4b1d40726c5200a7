// Analytic initial conditions: the barotropic jet with its balanced height
// and perturbation, and the strain-history field around a crack.

use ldon::datagen::ics::{latitude_grid, longitude_grid};
use ldon::datagen::{balanced_height, height_perturbation, strain_history, zonal_jet_u, CrackParams, JetParams, PerturbParams};

pub fn run_example() -> ldon::Result<()> {
    let jet = JetParams::galewsky();
    let phis = latitude_grid(64);
    let u = zonal_jet_u(&phis, &jet)?;
    let (k, umax) = u.iter().enumerate().fold((0, 0.0f64), |acc, (i, &v)| if v > acc.1 { (i, v) } else { acc });
    println!("jet peak {umax:.3} m/s at latitude {:.4} rad", phis[k]);

    let h = balanced_height(&phis, &jet, 10_000.0, 16)?;
    let (lo, hi) = h.iter().fold((f64::MAX, f64::MIN), |(a, b), &v| (a.min(v), b.max(v)));
    println!("balanced height spans {lo:.1} .. {hi:.1} m");

    let lambdas = longitude_grid(128);
    let bump = height_perturbation(&lambdas, &phis, &PerturbParams::galewsky())?;
    println!("perturbation max {:.3} m", bump.iter().cloned().fold(f64::MIN, f64::max));

    let crack = CrackParams::new(0.5, 0.5);
    let hist = strain_history(33, 33, &crack)?;
    let nonzero = hist.iter().filter(|&&v| v > 0.0).count();
    println!("strain history: on-crack {:.1}, {nonzero} of {} nodes non-zero", crack.history_at(0.25, 0.5), hist.len());
    Ok(())
}

#[allow(dead_code)]
fn main() -> ldon::Result<()> {
    run_example()
}
