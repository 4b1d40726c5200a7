// Fits PCA and a multi-layer autoencoder to the same snapshots and
// compares their held-out reconstruction error.

use ldon::datagen::{generate_diffusion_dataset, DatasetConfig};
use ldon::dimred::{assemble_snapshots, fit_mlae, fit_pca, MlaeConfig, SnapshotMode};
use ldon::grf::GrfConfig;

pub fn run_example() -> ldon::Result<(f64, f64)> {
    let mut cfg = DatasetConfig {
        grf: GrfConfig { nx: 16, ny: 16, ..GrfConfig::default() },
        n_samples: 40,
        ..DatasetConfig::default()
    };
    cfg.pde.m_t = 5;
    let ds = generate_diffusion_dataset(&cfg)?;
    let train = assemble_snapshots(&ds.train(), SnapshotMode::Combined);
    let test = assemble_snapshots(&ds.test(), SnapshotMode::Combined);
    println!("{} training snapshots of dimension {}", train.rows(), train.dim());

    let d = 16;
    let pca = fit_pca(&train, d)?;
    let pca_mse = pca.reconstruction_mse(&test.z)?;
    let mlae = fit_mlae(&train, &MlaeConfig { epochs: 30, ..MlaeConfig::new(d, 1) })?;
    let mlae_mse = mlae.reconstruction_mse(&test.z)?;
    println!("d = {d}: PCA test mse {pca_mse:.3e}, MLAE test mse {mlae_mse:.3e}");
    println!("MLAE widths {:?}, {} parameters", mlae.widths().unwrap_or_default(), mlae.param_count());
    Ok((pca_mse, mlae_mse))
}

#[allow(dead_code)]
fn main() -> ldon::Result<()> {
    run_example().map(|_| ())
}
