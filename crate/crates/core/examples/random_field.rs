// Samples Gaussian random fields from a truncated Karhunen–Loève basis and
// compares the sample variance with the kernel's.

use ldon::grf::{build_kle, sample_field, GrfConfig};

pub fn run_example() -> ldon::Result<(usize, f64)> {
    let cfg = GrfConfig {
        nx: 16,
        ny: 16,
        ..GrfConfig::default()
    };
    let basis = build_kle(&cfg)?;
    let kept: f64 = basis.eigenvalues.iter().sum();
    println!(
        "{} of {} modes keep {:.2}% of the variance",
        basis.n_modes(),
        basis.points(),
        100.0 * kept / basis.total_variance
    );

    let samples = 2000;
    let mut var = vec![0.0; basis.points()];
    for s in 0..samples {
        let f = sample_field(&basis, s as u64);
        var.iter_mut().zip(&f).for_each(|(v, x)| *v += x * x / samples as f64);
    }
    let mean_var = var.iter().sum::<f64>() / var.len() as f64;
    println!("pointwise variance {mean_var:.4} (kernel {:.4})", cfg.variance);
    Ok((basis.n_modes(), mean_var))
}

#[allow(dead_code)]
fn main() -> ldon::Result<()> {
    run_example().map(|_| ())
}
