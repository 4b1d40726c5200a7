//! The subcommands: each reads its inputs from the output directory and
//! writes its artifacts back there.

use std::path::{Path, PathBuf};
use std::time::Instant;

use crate::datagen::{generate_diffusion_dataset, FieldDataset};
use crate::dimred::{assemble_snapshots, fit_mlae, fit_pca, MlaeConfig, ReducerKind, ReducerModel};
use crate::error::{Error, Result};
use crate::operators::{
    check_param_ordering, evaluate_mse, train_deeponet, train_fno, DeepOnetConfig, DeepOnetModel, FnoConfig,
    FnoModel, TrainConfig,
};
use crate::pipeline::container::Container;
use crate::tensor::Tensor;

use super::config::{ExperimentConfig, ModelKind, Split};
use super::report::{fmt_real, write_csv, write_timings, RunReport};

pub const DATASET_FILE: &str = "dataset.ldon";
pub const REDUCER_FILE: &str = "reducer.ldon";
pub const OPERATOR_FILE: &str = "operator.ldon";
pub const REPORT_FILE: &str = "report.txt";
pub const TIMINGS_FILE: &str = "timings.csv";
pub const METRICS_FILE: &str = "metrics.csv";
pub const COMPARE_FILE: &str = "compare.csv";
pub const COMPARE_TIMINGS_FILE: &str = "compare_timings.csv";

/// Caps the rayon pool at `LDON_THREADS` workers when set. Only the first
/// call in a process has an effect.
pub fn init_threads() -> Result<()> {
    let Ok(v) = std::env::var("LDON_THREADS") else {
        return Ok(());
    };
    let n: usize = v
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| Error::config(format!("LDON_THREADS must be a positive integer, got `{v}`")))?;
    if rayon::ThreadPoolBuilder::new().num_threads(n).build_global().is_err() {
        log::debug!("rayon pool already initialised; LDON_THREADS={n} ignored");
    }
    Ok(())
}

fn seed_of(cfg: &ExperimentConfig) -> u64 {
    cfg.seeds[0]
}

fn split(ds: &FieldDataset, which: Split) -> Result<FieldDataset> {
    let (range, name) = match which {
        Split::Train => (0..ds.n_train, "train"),
        Split::Test => (ds.n_train..ds.len(), "test"),
        Split::All => (0..ds.len(), "full"),
    };
    if range.is_empty() {
        return Err(Error::invalid(format!("the {name} split is empty")));
    }
    Ok(ds.subset(range))
}

/// Fits the configured reducer on the training snapshots.
pub fn fit_reducer_on(
    ds: &FieldDataset,
    cfg: &ExperimentConfig,
    kind: ReducerKind,
    d: usize,
    seed: u64,
) -> Result<ReducerModel> {
    let snaps = assemble_snapshots(&ds.train(), cfg.reducer.mode);
    match kind {
        ReducerKind::Pca => fit_pca(&snaps, d),
        ReducerKind::Mlae => fit_mlae(
            &snaps,
            &MlaeConfig {
                latent_dim: d,
                widths: cfg.reducer.widths.clone(),
                epochs: cfg.reducer.epochs,
                batch: cfg.reducer.batch,
                lr: cfg.reducer.lr,
                seed,
            },
        ),
    }
}

fn train_config(cfg: &ExperimentConfig, seed: u64) -> TrainConfig {
    TrainConfig {
        epochs: cfg.operator.epochs,
        batch: cfg.operator.batch,
        lr: cfg.operator.lr,
        seed,
    }
}

pub fn deeponet_config(cfg: &ExperimentConfig, model: ModelKind, d: usize, nx: usize, ny: usize, seed: u64) -> DeepOnetConfig {
    let base = match model {
        ModelKind::Latent => DeepOnetConfig::latent(d, cfg.operator.p, seed),
        _ => DeepOnetConfig::full(nx, ny, cfg.operator.p, seed),
    };
    DeepOnetConfig {
        branch: cfg.operator.branch,
        trunk_width: cfg.operator.trunk_width,
        trunk_depth: cfg.operator.trunk_depth,
        ..base
    }
}

pub fn fno_config(cfg: &ExperimentConfig, nx: usize, ny: usize, seed: u64) -> FnoConfig {
    FnoConfig {
        width: cfg.fno.width,
        layers: cfg.fno.layers,
        modes: cfg.fno.modes,
        ..FnoConfig::new(nx, ny, seed)
    }
}

/// Encodes normalized inputs `[N, D]` and outputs `[N, T, D]` into latent
/// codes `[N, d]` and `[N, T, d]`.
pub fn encode_dataset(reducer: &ReducerModel, ds: &FieldDataset) -> Result<(Tensor, Tensor)> {
    let (n, t, d) = (ds.len(), ds.m_t(), reducer.latent_dim);
    let x = reducer.encode(&ds.inputs)?;
    let y = reducer.encode(&ds.outputs.reshape(&[n * t, ds.points()])?)?.reshape(&[n, t, d])?;
    Ok((x, y))
}

/// A trained operator of any kind.
pub enum Operator {
    DeepOnet(DeepOnetModel),
    Fno(FnoModel),
}

impl Operator {
    pub fn from_container(c: &Container) -> Result<Self> {
        match c.manifest.get("model") {
            Some("deeponet") => Ok(Operator::DeepOnet(DeepOnetModel::from_container(c)?)),
            Some("fno") => Ok(Operator::Fno(FnoModel::from_container(c)?)),
            other => Err(Error::invalid(format!("unknown operator artifact {other:?}"))),
        }
    }

    pub fn to_container(&self) -> Container {
        match self {
            Operator::DeepOnet(m) => m.to_container(),
            Operator::Fno(m) => m.to_container(),
        }
    }

    pub fn kind(&self) -> ModelKind {
        match self {
            Operator::DeepOnet(m) if m.config.mode == crate::operators::OperatorMode::Latent => ModelKind::Latent,
            Operator::DeepOnet(_) => ModelKind::Full,
            Operator::Fno(_) => ModelKind::Fno,
        }
    }

    pub fn param_count(&self) -> usize {
        match self {
            Operator::DeepOnet(m) => m.param_count(),
            Operator::Fno(m) => m.param_count(),
        }
    }

    /// Decoded-space MSE on `ds` plus, for latent models, the latent-space
    /// MSE against the encoded targets.
    pub fn evaluate(&self, ds: &FieldDataset, reducer: Option<&ReducerModel>) -> Result<(f64, Option<f64>)> {
        let reference = ds.raw_outputs();
        let (n, t) = (ds.len(), ds.m_t());
        let (pred, latent) = match (self, self.kind()) {
            (Operator::DeepOnet(m), ModelKind::Latent) => {
                let r = reducer.ok_or_else(|| Error::invalid("latent operator needs its reducer"))?;
                if r.latent_dim != m.config.in_dim {
                    return Err(Error::invalid(format!(
                        "operator expects {} latents but the reducer has {}",
                        m.config.in_dim, r.latent_dim
                    )));
                }
                let (x, y) = encode_dataset(r, ds)?;
                let z = m.forward(&x, &ds.time)?;
                let latent = evaluate_mse(&z, &y)?;
                let mut dec = r.decode(&z.reshape(&[n * t, r.latent_dim])?)?;
                r.output_norm.denormalize_in_place(dec.data_mut());
                (dec.reshape(&[n, t, ds.points()])?, Some(latent))
            }
            (Operator::DeepOnet(m), _) => {
                let mut y = m.forward(&ds.inputs, &ds.time)?;
                ds.output_norm.denormalize_in_place(y.data_mut());
                (y, None)
            }
            (Operator::Fno(m), _) => {
                let mut y = m.rollout(&ds.inputs, t)?;
                ds.output_norm.denormalize_in_place(y.data_mut());
                (y, None)
            }
        };
        if !pred.is_finite() {
            return Err(Error::Numeric("prediction contains non-finite values".into()));
        }
        Ok((evaluate_mse(&pred, &reference)?, latent))
    }
}

/// Trains one operator on the training split and evaluates it on
/// `cfg.eval_split`. `reducer` is required for latent runs; `reducer_seconds`
/// is its fit time when it was fitted for this run.
pub fn train_run(
    cfg: &ExperimentConfig,
    ds: &FieldDataset,
    model: ModelKind,
    reducer: Option<(&ReducerModel, f64)>,
    seed: u64,
) -> Result<(RunReport, Operator)> {
    let train = ds.train();
    let eval = split(ds, cfg.eval_split)?;
    let tc = train_config(cfg, seed);
    let mut phases = Vec::new();
    if let Some((_, s)) = reducer {
        phases.push(("reducer".to_string(), s));
    }
    let (op, log) = match model {
        ModelKind::Latent => {
            let (r, _) = reducer.ok_or_else(|| Error::invalid("latent run needs a reducer"))?;
            let (x, y) = encode_dataset(r, &train)?;
            let mut m = DeepOnetModel::new(deeponet_config(cfg, model, r.latent_dim, ds.nx, ds.ny, seed))?;
            let log = train_deeponet(&mut m, &x, &y, &ds.time, &tc)?;
            (Operator::DeepOnet(m), log)
        }
        ModelKind::Full => {
            let mut m = DeepOnetModel::new(deeponet_config(cfg, model, 0, ds.nx, ds.ny, seed))?;
            let log = train_deeponet(&mut m, &train.inputs, &train.outputs, &ds.time, &tc)?;
            (Operator::DeepOnet(m), log)
        }
        ModelKind::Fno => {
            let mut m = FnoModel::new(fno_config(cfg, ds.nx, ds.ny, seed))?;
            let log = train_fno(&mut m, &train.inputs, &train.outputs, &tc)?;
            (Operator::Fno(m), log)
        }
    };
    phases.push(("train".to_string(), log.seconds));
    let start = Instant::now();
    let r = reducer.map(|(r, _)| r);
    let (decoded_mse, latent_mse) = op.evaluate(&eval, r)?;
    phases.push(("evaluate".to_string(), start.elapsed().as_secs_f64().max(f64::MIN_POSITIVE)));
    let report = RunReport {
        config_hash: cfg.hash(),
        model,
        reducer: r.filter(|_| model == ModelKind::Latent).map(|r| r.kind().to_string()),
        d: r.filter(|_| model == ModelKind::Latent).map(|r| r.latent_dim),
        seed,
        epoch_losses: log.epoch_losses,
        latent_mse,
        decoded_mse,
        param_count: op.param_count(),
        reducer_param_count: r.filter(|_| model == ModelKind::Latent).map(|r| r.param_count()),
        param_ordering_holds: None,
        phases,
    };
    Ok((report, op))
}

fn path(cfg: &ExperimentConfig, file: &str) -> PathBuf {
    cfg.output_dir.join(file)
}

pub fn gen_data(cfg: &ExperimentConfig) -> Result<FieldDataset> {
    let ds = generate_diffusion_dataset(&cfg.dataset)?;
    ds.save(&path(cfg, DATASET_FILE))?;
    Ok(ds)
}

pub fn fit_reducer(cfg: &ExperimentConfig) -> Result<ReducerModel> {
    let ds = FieldDataset::load(&path(cfg, DATASET_FILE))?;
    let r = fit_reducer_on(&ds, cfg, cfg.reducer.kind, cfg.reducer.d, seed_of(cfg))?;
    r.save(&path(cfg, REDUCER_FILE))?;
    Ok(r)
}

fn load_reducer_if(cfg: &ExperimentConfig, model: ModelKind) -> Result<Option<ReducerModel>> {
    match model {
        ModelKind::Latent => ReducerModel::load(&path(cfg, REDUCER_FILE)).map(Some),
        _ => Ok(None),
    }
}

pub fn train_operator(cfg: &ExperimentConfig) -> Result<RunReport> {
    let ds = FieldDataset::load(&path(cfg, DATASET_FILE))?;
    let reducer = load_reducer_if(cfg, cfg.operator.model)?;
    let (report, op) = train_run(cfg, &ds, cfg.operator.model, reducer.as_ref().map(|r| (r, 0.0)), seed_of(cfg))?;
    // the reducer was fitted by a separate command; keep only this run's phases
    let mut report = report;
    report.phases.retain(|(p, _)| p != "reducer");
    op.to_container().write(&path(cfg, OPERATOR_FILE))?;
    report.write(&path(cfg, REPORT_FILE))?;
    write_timings(&path(cfg, TIMINGS_FILE), std::slice::from_ref(&report))?;
    Ok(report)
}

/// Decoded-space MSE of the saved operator on `cfg.eval_split`.
pub fn evaluate(cfg: &ExperimentConfig) -> Result<f64> {
    let ds = FieldDataset::load(&path(cfg, DATASET_FILE))?;
    let op = Operator::from_container(&Container::read(&path(cfg, OPERATOR_FILE))?)?;
    let reducer = load_reducer_if(cfg, op.kind())?;
    let eval = split(&ds, cfg.eval_split)?;
    let (mse, latent) = op.evaluate(&eval, reducer.as_ref())?;
    let split_name = match cfg.eval_split {
        Split::Train => "train",
        Split::Test => "test",
        Split::All => "all",
    };
    write_csv(
        &path(cfg, METRICS_FILE),
        &["model", "split", "samples", "mse", "latent_mse"],
        &[vec![
            op.kind().to_string(),
            split_name.into(),
            eval.len().to_string(),
            fmt_real(mse),
            latent.map(fmt_real).unwrap_or_default(),
        ]],
    )?;
    Ok(mse)
}

/// Runs every requested model over all seeds and writes `compare.csv`
/// (deterministic) and `compare_timings.csv`.
pub fn compare(cfg: &ExperimentConfig) -> Result<Vec<RunReport>> {
    let ds = generate_diffusion_dataset(&cfg.dataset)?;
    let models = &cfg.compare.models;
    let mut ordering = std::collections::BTreeMap::new();
    if models.contains(&ModelKind::Latent) && models.contains(&ModelKind::Full) {
        let full = DeepOnetModel::new(deeponet_config(cfg, ModelKind::Full, 0, ds.nx, ds.ny, 0))?;
        for &d in &cfg.compare.d {
            let latent = DeepOnetModel::new(deeponet_config(cfg, ModelKind::Latent, d, ds.nx, ds.ny, 0))?;
            let check = check_param_ordering(&latent, &full);
            if let Err(e) = &check {
                log::warn!("d = {d}: {e}");
            }
            ordering.insert(d, check.is_ok());
        }
    }
    let mut reports = Vec::new();
    for &model in models {
        if model == ModelKind::Latent {
            for &kind in &cfg.compare.reducers {
                for &d in &cfg.compare.d {
                    for &seed in &cfg.seeds {
                        let start = Instant::now();
                        let r = fit_reducer_on(&ds, cfg, kind, d, seed)?;
                        let fit = start.elapsed().as_secs_f64().max(f64::MIN_POSITIVE);
                        let (mut report, _) = train_run(cfg, &ds, model, Some((&r, fit)), seed)?;
                        report.param_ordering_holds = ordering.get(&d).copied();
                        log::info!("{model} {kind} d={d} seed={seed}: mse {:.4e}", report.decoded_mse);
                        reports.push(report);
                    }
                }
            }
        } else {
            for &seed in &cfg.seeds {
                let (mut report, _) = train_run(cfg, &ds, model, None, seed)?;
                if model == ModelKind::Full && !ordering.is_empty() {
                    report.param_ordering_holds = Some(ordering.values().all(|&ok| ok));
                }
                log::info!("{model} seed={seed}: mse {:.4e}", report.decoded_mse);
                reports.push(report);
            }
        }
    }
    let rows: Vec<Vec<String>> = reports
        .iter()
        .map(|r| {
            vec![
                r.model.to_string(),
                r.reducer.clone().unwrap_or_default(),
                r.d.map(|d| d.to_string()).unwrap_or_default(),
                r.seed.to_string(),
                fmt_real(r.decoded_mse),
                r.latent_mse.map(fmt_real).unwrap_or_default(),
                r.param_count.to_string(),
            ]
        })
        .collect();
    write_csv(
        &path(cfg, COMPARE_FILE),
        &["model", "reducer", "d", "seed", "mse", "latent_mse", "params"],
        &rows,
    )?;
    write_timings(&path(cfg, COMPARE_TIMINGS_FILE), &reports)?;
    Ok(reports)
}

/// Dumps a container to `<stem>.csv` (one row per element) and
/// `<stem>.manifest.csv` inside `out`. Returns the tensor CSV path.
pub fn export(artifact: &Path, out: &Path) -> Result<PathBuf> {
    let c = Container::read(artifact)?;
    let stem = artifact
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "artifact".into());
    let mut rows = Vec::new();
    for (name, t) in &c.tensors {
        let shape: Vec<String> = t.shape().iter().map(|s| s.to_string()).collect();
        let shape = shape.join("x");
        for (i, v) in t.data().iter().enumerate() {
            rows.push(vec![name.clone(), shape.clone(), i.to_string(), fmt_real(*v)]);
        }
    }
    let target = out.join(format!("{stem}.csv"));
    write_csv(&target, &["tensor", "shape", "index", "value"], &rows)?;
    let manifest: Vec<Vec<String>> = c
        .manifest
        .0
        .iter()
        .map(|(k, v)| vec![k.to_string(), v.to_string()])
        .collect();
    write_csv(&out.join(format!("{stem}.manifest.csv")), &["key", "value"], &manifest)?;
    Ok(target)
}

/// Exports every `.ldon` artifact in the output directory.
pub fn export_all(cfg: &ExperimentConfig) -> Result<Vec<PathBuf>> {
    let dir = &cfg.output_dir;
    let entries = std::fs::read_dir(dir).map_err(|_| Error::MissingArtifact { path: dir.clone() })?;
    let mut files: Vec<PathBuf> = entries
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|e| e == "ldon"))
        .collect();
    files.sort();
    if files.is_empty() {
        return Err(Error::MissingArtifact { path: dir.join("*.ldon") });
    }
    files.iter().map(|f| export(f, dir)).collect()
}
