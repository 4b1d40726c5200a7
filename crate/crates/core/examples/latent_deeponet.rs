// End-to-end L-DeepONet: reduce inputs and outputs with PCA, train a
// DeepONet between latent codes, decode the predictions and score them in
// physical units.

use ldon::datagen::{generate_diffusion_dataset, DatasetConfig};
use ldon::dimred::{assemble_snapshots, fit_pca, SnapshotMode};
use ldon::grf::GrfConfig;
use ldon::operators::{evaluate_mse, l_deeponet_predict, train_deeponet, DeepOnetConfig, DeepOnetModel, TrainConfig};

pub fn run_example() -> ldon::Result<f64> {
    let mut cfg = DatasetConfig {
        grf: GrfConfig { nx: 16, ny: 16, ..GrfConfig::default() },
        n_samples: 40,
        ..DatasetConfig::default()
    };
    cfg.pde.m_t = 5;
    let ds = generate_diffusion_dataset(&cfg)?;
    let (train, test) = (ds.train(), ds.test());

    let d = 16;
    let reducer = fit_pca(&assemble_snapshots(&train, SnapshotMode::Combined), d)?;
    let n = train.len();
    let x = reducer.encode(&train.inputs)?;
    let y = reducer
        .encode(&train.outputs.reshape(&[n * ds.m_t(), ds.points()])?)?
        .reshape(&[n, ds.m_t(), d])?;

    let mut model = DeepOnetModel::new(DeepOnetConfig::latent(d, 5, 1))?;
    let log = train_deeponet(&mut model, &x, &y, &ds.time, &TrainConfig { epochs: 40, ..TrainConfig::default() })?;
    println!(
        "{} parameters, latent loss {:.3e} -> {:.3e} in {:.2}s",
        model.param_count(),
        log.epoch_losses[0],
        log.final_loss(),
        log.seconds
    );

    let pred = l_deeponet_predict(&reducer, &reducer, &model, &test.raw_inputs(), &ds.time)?;
    let mse = evaluate_mse(&pred.reshape(&[test.len(), ds.m_t(), ds.points()])?, &test.raw_outputs())?;
    println!("decoded test mse {mse:.3e} over {} trajectories", test.len());
    Ok(mse)
}

#[allow(dead_code)]
fn main() -> ldon::Result<()> {
    run_example().map(|_| ())
}
