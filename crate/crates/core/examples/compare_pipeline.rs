// Runs a tiny seed matrix through the pipeline, writes compare.csv and
// reloads a saved reducer from its container.

use ldon::dimred::ReducerModel;
use ldon::pipeline::{commands, compare, ExperimentConfig};

pub fn run_example() -> ldon::Result<usize> {
    let dir = std::env::temp_dir().join(format!("ldon-compare-example-{}", std::process::id()));
    let mut cfg = ExperimentConfig::parse(
        "dataset.nx = 8\n\
         dataset.ny = 8\n\
         dataset.n_samples = 12\n\
         dataset.m_t = 4\n\
         reducer.d = 9\n\
         reducer.epochs = 5\n\
         operator.epochs = 3\n\
         fno.width = 4\n\
         fno.layers = 1\n\
         fno.modes = 2\n\
         compare.models = latent, full, fno\n\
         compare.reducers = pca, mlae\n\
         compare.d = 9\n\
         seeds = 1..2\n",
    )?;
    cfg.output_dir = dir.clone();
    let reports = compare(&cfg)?;
    for r in &reports {
        println!(
            "{:>6} {:>4} seed {}: mse {:.3e}, {} params",
            r.model,
            r.reducer.as_deref().unwrap_or("-"),
            r.seed,
            r.decoded_mse,
            r.param_count
        );
    }
    let csv = std::fs::read_to_string(dir.join(commands::COMPARE_FILE))?;
    println!("{}", csv.lines().next().unwrap_or_default());

    commands::gen_data(&cfg)?;
    let fitted = commands::fit_reducer(&cfg)?;
    let loaded = ReducerModel::load(&dir.join(commands::REDUCER_FILE))?;
    assert_eq!(fitted.to_container().to_bytes()?, loaded.to_container().to_bytes()?);
    std::fs::remove_dir_all(&dir)?;
    Ok(csv.lines().count() - 1)
}

#[allow(dead_code)]
fn main() -> ldon::Result<()> {
    run_example().map(|_| ())
}
