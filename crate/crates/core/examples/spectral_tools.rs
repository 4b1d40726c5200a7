// FFT roundtrip and Parseval check, then a truncated SVD and its
// Eckart–Young residual.

use ldon::linalg::{fft2, fft2_real, truncated_svd, Direction};
use ldon::rng::Normal;

pub fn run_example() -> ldon::Result<()> {
    let mut g = Normal::from_seed(11);
    let (rows, cols) = (32, 16);
    let field: Vec<f64> = (0..rows * cols).map(|_| g.sample()).collect();
    let spec = fft2_real(rows, cols, &field)?;
    let back = fft2(&spec, Direction::Inverse)?.real_part();
    let err = field.iter().zip(&back).fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
    let energy: f64 = field.iter().map(|v| v * v).sum();
    println!("fft roundtrip max error {err:.2e}");
    println!("parseval: {energy:.6} vs {:.6}", spec.energy() / (rows * cols) as f64);

    let (m, n, k) = (60, 20, 5);
    let x: Vec<f64> = (0..m * n).map(|_| g.sample()).collect();
    let svd = truncated_svd(&x, m, n, k)?;
    let rec = svd.reconstruct();
    let direct: f64 = x.iter().zip(&rec).map(|(a, b)| (a - b).powi(2)).sum();
    println!("rank-{k} residual {direct:.6}, sum of dropped sigma^2 {:.6}", svd.residual_sq());
    Ok(())
}

#[allow(dead_code)]
fn main() -> ldon::Result<()> {
    run_example()
}
