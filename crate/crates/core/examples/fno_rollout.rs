// Trains a small Fourier neural operator on one-step pairs and rolls it
// out recurrently over the whole trajectory.

use ldon::datagen::{generate_diffusion_dataset, DatasetConfig};
use ldon::grf::GrfConfig;
use ldon::operators::{evaluate_mse, train_fno, FnoConfig, FnoModel, TrainConfig};

pub fn run_example() -> ldon::Result<f64> {
    let mut cfg = DatasetConfig {
        grf: GrfConfig { nx: 16, ny: 16, ..GrfConfig::default() },
        n_samples: 24,
        ..DatasetConfig::default()
    };
    cfg.pde.m_t = 4;
    let ds = generate_diffusion_dataset(&cfg)?;
    let (train, test) = (ds.train(), ds.test());

    let mut model = FnoModel::new(FnoConfig { width: 8, layers: 2, modes: 4, ..FnoConfig::new(16, 16, 3) })?;
    let log = train_fno(&mut model, &train.inputs, &train.outputs, &TrainConfig { epochs: 15, batch: 16, ..TrainConfig::default() })?;
    println!("{} parameters, one-step loss {:.3e} -> {:.3e}", model.param_count(), log.epoch_losses[0], log.final_loss());

    let mut pred = model.rollout(&test.inputs, ds.m_t())?;
    ds.output_norm.denormalize_in_place(pred.data_mut());
    let mse = evaluate_mse(&pred, &test.raw_outputs())?;
    println!("rollout test mse {mse:.3e}");
    Ok(mse)
}

#[allow(dead_code)]
fn main() -> ldon::Result<()> {
    run_example().map(|_| ())
}
