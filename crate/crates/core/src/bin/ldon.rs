use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use ldon::pipeline::{self, ExperimentConfig};

#[derive(Parser)]
#[command(name = "ldon", version, about = "Latent DeepONet experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Configuration file (`key = value` lines).
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Override one key, e.g. `--set reducer.d=16`. Repeatable.
    #[arg(long = "set", global = true, value_name = "KEY=VALUE")]
    overrides: Vec<String>,
    /// Output directory (overrides `output.dir`).
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Run a single seed instead of the configured list.
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[arg(long, global = true)]
    quiet: bool,
}

#[derive(Subcommand)]
enum Command {
    /// Generate the diffusion dataset.
    GenData,
    /// Fit the dimensionality reducer on the training snapshots.
    FitReducer,
    /// Train the configured operator and write its report.
    TrainOperator,
    /// Decoded-space MSE of the trained operator.
    Evaluate,
    /// Run the model x seed matrix and write compare.csv.
    Compare,
    /// Dump artifacts to CSV; every artifact in the output directory by default.
    Export { artifacts: Vec<PathBuf> },
}

fn run(cli: Cli) -> ldon::Result<()> {
    let mut cfg = match &cli.config {
        Some(p) => ExperimentConfig::from_file(p)?,
        None => ExperimentConfig::default(),
    };
    for (i, o) in cli.overrides.iter().enumerate() {
        cfg.apply_override(i, o)?;
    }
    if let Some(out) = cli.out {
        cfg.output_dir = out;
    }
    if let Some(seed) = cli.seed {
        cfg.seeds = vec![seed];
    }
    pipeline::init_threads()?;
    match cli.command {
        Command::GenData => {
            let ds = pipeline::gen_data(&cfg)?;
            log::info!("wrote {} samples ({} train)", ds.len(), ds.n_train);
        }
        Command::FitReducer => {
            let r = pipeline::fit_reducer(&cfg)?;
            log::info!("fitted {} reducer, d = {}", r.kind(), r.latent_dim);
        }
        Command::TrainOperator => {
            let r = pipeline::train_operator(&cfg)?;
            log::info!("{} operator: decoded mse {:.6e}", r.model, r.decoded_mse);
        }
        Command::Evaluate => {
            let mse = pipeline::evaluate(&cfg)?;
            log::info!("decoded mse {mse:.6e}");
        }
        Command::Compare => {
            let reports = pipeline::compare(&cfg)?;
            log::info!("{} runs written", reports.len());
        }
        Command::Export { artifacts } => {
            let written = if artifacts.is_empty() {
                pipeline::export_all(&cfg)?
            } else {
                artifacts
                    .iter()
                    .map(|a| pipeline::export(a, &cfg.output_dir))
                    .collect::<ldon::Result<_>>()?
            };
            for w in written {
                log::info!("wrote {}", w.display());
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let level = if cli.quiet { "warn" } else { "info" };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level)).init();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
