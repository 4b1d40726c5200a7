//! Flat `key = value` experiment configuration.
//!
//! One assignment per line, `#` starts a comment, keys are dotted
//! (`reducer.d = 64`). Unknown keys and malformed values are reported with
//! their line and column.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use sha2::{Digest, Sha256};

use crate::datagen::DatasetConfig;
use crate::dimred::{ReducerKind, SnapshotMode};
use crate::error::{Error, Result};
use crate::operators::BranchKind;

/// Which operator a run trains.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum ModelKind {
    Latent,
    Full,
    Fno,
}

impl std::fmt::Display for ModelKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.pad(match self {
            ModelKind::Latent => "latent",
            ModelKind::Full => "full",
            ModelKind::Fno => "fno",
        })
    }
}

impl std::str::FromStr for ModelKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "latent" => Ok(ModelKind::Latent),
            "full" => Ok(ModelKind::Full),
            "fno" => Ok(ModelKind::Fno),
            _ => Err(Error::invalid(format!("unknown model `{s}` (expected latent, full or fno)"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ReducerSpec {
    pub kind: ReducerKind,
    pub d: usize,
    pub epochs: usize,
    pub batch: usize,
    pub lr: f64,
    pub mode: SnapshotMode,
    /// Hidden widths of the autoencoder; geometric default when `None`.
    pub widths: Option<Vec<usize>>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct OperatorSpec {
    pub model: ModelKind,
    pub p: usize,
    pub epochs: usize,
    pub batch: usize,
    pub lr: f64,
    pub branch: BranchKind,
    pub trunk_width: usize,
    pub trunk_depth: usize,
}

#[derive(Clone, Debug, PartialEq)]
pub struct FnoSpec {
    pub width: usize,
    pub layers: usize,
    pub modes: usize,
}

#[derive(Clone, Debug, PartialEq)]
pub struct CompareSpec {
    pub models: Vec<ModelKind>,
    pub reducers: Vec<ReducerKind>,
    pub d: Vec<usize>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Split {
    Train,
    Test,
    All,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ExperimentConfig {
    pub dataset: DatasetConfig,
    pub reducer: ReducerSpec,
    pub operator: OperatorSpec,
    pub fno: FnoSpec,
    pub compare: CompareSpec,
    pub eval_split: Split,
    pub seeds: Vec<u64>,
    pub output_dir: PathBuf,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            dataset: DatasetConfig::default(),
            reducer: ReducerSpec {
                kind: ReducerKind::Mlae,
                d: 64,
                epochs: 200,
                batch: 32,
                lr: 1e-3,
                mode: SnapshotMode::Combined,
                widths: None,
            },
            operator: OperatorSpec {
                model: ModelKind::Latent,
                p: 5,
                epochs: 200,
                batch: 32,
                lr: 1e-3,
                branch: BranchKind::Conv,
                trunk_width: 100,
                trunk_depth: 2,
            },
            fno: FnoSpec {
                width: 32,
                layers: 4,
                modes: 8,
            },
            compare: CompareSpec {
                models: vec![ModelKind::Latent, ModelKind::Full, ModelKind::Fno],
                reducers: vec![ReducerKind::Mlae],
                d: vec![16, 64],
            },
            eval_split: Split::Test,
            seeds: vec![1, 2, 3, 4, 5],
            output_dir: PathBuf::from("runs"),
        }
    }
}

/// Every accepted key, in canonical order.
pub const KEYS: &[&str] = &[
    "dataset.nx",
    "dataset.ny",
    "dataset.n_samples",
    "dataset.m_t",
    "dataset.train_fraction",
    "dataset.seed",
    "dataset.length_scale_x",
    "dataset.length_scale_y",
    "dataset.variance",
    "dataset.kle_energy",
    "dataset.diffusivity",
    "dataset.reaction_rate",
    "dataset.t_final",
    "dataset.steps_per_snapshot",
    "reducer.kind",
    "reducer.d",
    "reducer.epochs",
    "reducer.batch",
    "reducer.lr",
    "reducer.mode",
    "reducer.widths",
    "operator.mode",
    "operator.p",
    "operator.epochs",
    "operator.batch",
    "operator.lr",
    "operator.branch",
    "operator.trunk_width",
    "operator.trunk_depth",
    "operator.decode_in_loss",
    "fno.width",
    "fno.layers",
    "fno.modes",
    "compare.models",
    "compare.reducers",
    "compare.d",
    "evaluate.split",
    "seeds",
    "output.dir",
];

fn num<T: std::str::FromStr>(v: &str) -> std::result::Result<T, String> {
    v.parse().map_err(|_| format!("cannot parse `{v}`"))
}

fn positive(v: &str) -> std::result::Result<usize, String> {
    match num::<usize>(v)? {
        0 => Err("value must be positive".into()),
        n => Ok(n),
    }
}

fn positive_f64(v: &str) -> std::result::Result<f64, String> {
    let x: f64 = num(v)?;
    if x.is_finite() && x > 0.0 {
        Ok(x)
    } else {
        Err(format!("`{v}` must be a positive finite number"))
    }
}

fn list<T>(v: &str, f: impl Fn(&str) -> std::result::Result<T, String>) -> std::result::Result<Vec<T>, String> {
    let items: Vec<T> = v
        .split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(f)
        .collect::<std::result::Result<_, _>>()?;
    if items.is_empty() {
        return Err("list must not be empty".into());
    }
    Ok(items)
}

/// `1,2,3` or an inclusive range `1..5`.
fn seeds(v: &str) -> std::result::Result<Vec<u64>, String> {
    if let Some((a, b)) = v.split_once("..") {
        let (a, b): (u64, u64) = (num(a.trim())?, num(b.trim())?);
        if a > b {
            return Err(format!("empty seed range {v}"));
        }
        return Ok((a..=b).collect());
    }
    list(v, num)
}

fn parse_with<T: std::str::FromStr<Err = Error>>(v: &str) -> std::result::Result<T, String> {
    v.parse().map_err(|e: Error| e.to_string())
}

fn join<T: ToString>(items: &[T]) -> String {
    items.iter().map(ToString::to_string).collect::<Vec<_>>().join(",")
}

impl ExperimentConfig {
    /// Parses `text` on top of the defaults.
    pub fn parse(text: &str) -> Result<Self> {
        let mut cfg = Self::default();
        cfg.apply_text(text)?;
        Ok(cfg)
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| match e.kind() {
            std::io::ErrorKind::NotFound => Error::MissingArtifact { path: path.to_path_buf() },
            _ => Error::Io(e),
        })?;
        Self::parse(&text)
    }

    pub fn apply_text(&mut self, text: &str) -> Result<()> {
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("");
            if line.trim().is_empty() {
                continue;
            }
            let Some(eq) = line.find('=') else {
                let col = line.len() - line.trim_start().len() + 1;
                return Err(Error::Config {
                    line: i + 1,
                    column: col,
                    message: "expected `key = value`".into(),
                });
            };
            let key = line[..eq].trim();
            let key_col = line.len() - line.trim_start().len() + 1;
            let value = line[eq + 1..].trim();
            let value_col = eq + 2 + (line[eq + 1..].len() - line[eq + 1..].trim_start().len());
            if !KEYS.contains(&key) {
                return Err(Error::Config {
                    line: i + 1,
                    column: key_col,
                    message: format!("unknown key `{key}`"),
                });
            }
            self.set(key, value).map_err(|message| Error::Config {
                line: i + 1,
                column: value_col,
                message: format!("{key}: {message}"),
            })?;
        }
        self.validate()
    }

    /// Applies one `key=value` override; errors report the override's position.
    pub fn apply_override(&mut self, index: usize, assignment: &str) -> Result<()> {
        let Some((key, value)) = assignment.split_once('=') else {
            return Err(Error::Config {
                line: index + 1,
                column: 1,
                message: format!("override `{assignment}` is not key=value"),
            });
        };
        let key = key.trim();
        if !KEYS.contains(&key) {
            return Err(Error::Config {
                line: index + 1,
                column: 1,
                message: format!("unknown key `{key}` in override"),
            });
        }
        self.set(key, value.trim()).map_err(|message| Error::Config {
            line: index + 1,
            column: key.len() + 2,
            message: format!("{key}: {message}"),
        })?;
        self.validate()
    }

    fn set(&mut self, key: &str, v: &str) -> std::result::Result<(), String> {
        let ds = &mut self.dataset;
        match key {
            "dataset.nx" => ds.grf.nx = positive(v)?,
            "dataset.ny" => ds.grf.ny = positive(v)?,
            "dataset.n_samples" => ds.n_samples = positive(v)?,
            "dataset.m_t" => ds.pde.m_t = num(v)?,
            "dataset.train_fraction" => ds.train_fraction = num(v)?,
            "dataset.seed" => ds.grf.seed = num(v)?,
            "dataset.length_scale_x" => ds.grf.length_scale_x = positive_f64(v)?,
            "dataset.length_scale_y" => ds.grf.length_scale_y = positive_f64(v)?,
            "dataset.variance" => ds.grf.variance = num(v)?,
            "dataset.kle_energy" => ds.grf.kle_energy = num(v)?,
            "dataset.diffusivity" => ds.pde.diffusivity = num(v)?,
            "dataset.reaction_rate" => ds.pde.reaction_rate = num(v)?,
            "dataset.t_final" => ds.pde.t_final = positive_f64(v)?,
            "dataset.steps_per_snapshot" => ds.pde.steps_per_snapshot = positive(v)?,
            "reducer.kind" => self.reducer.kind = parse_with(v)?,
            "reducer.d" => self.reducer.d = positive(v)?,
            "reducer.epochs" => self.reducer.epochs = positive(v)?,
            "reducer.batch" => self.reducer.batch = positive(v)?,
            "reducer.lr" => self.reducer.lr = positive_f64(v)?,
            "reducer.mode" => {
                self.reducer.mode = match v {
                    "combined" => SnapshotMode::Combined,
                    "outputs" => SnapshotMode::OutputsOnly,
                    "inputs" => SnapshotMode::InputsOnly,
                    _ => return Err(format!("unknown snapshot mode `{v}`")),
                }
            }
            "reducer.widths" => {
                self.reducer.widths = if v == "auto" { None } else { Some(list(v, positive)?) }
            }
            "operator.mode" => self.operator.model = parse_with(v)?,
            "operator.p" => self.operator.p = positive(v)?,
            "operator.epochs" => self.operator.epochs = positive(v)?,
            "operator.batch" => self.operator.batch = positive(v)?,
            "operator.lr" => self.operator.lr = positive_f64(v)?,
            "operator.branch" => self.operator.branch = parse_with(v)?,
            "operator.trunk_width" => self.operator.trunk_width = positive(v)?,
            "operator.trunk_depth" => self.operator.trunk_depth = num(v)?,
            "operator.decode_in_loss" => {
                if num::<bool>(v)? {
                    return Err("decoding inside the loss is not supported; the loss is computed on latent codes".into());
                }
            }
            "fno.width" => self.fno.width = positive(v)?,
            "fno.layers" => self.fno.layers = num(v)?,
            "fno.modes" => self.fno.modes = positive(v)?,
            "compare.models" => self.compare.models = list(v, parse_with)?,
            "compare.reducers" => self.compare.reducers = list(v, parse_with)?,
            "compare.d" => self.compare.d = list(v, positive)?,
            "evaluate.split" => {
                self.eval_split = match v {
                    "train" => Split::Train,
                    "test" => Split::Test,
                    "all" => Split::All,
                    _ => return Err(format!("unknown split `{v}`")),
                }
            }
            "seeds" => self.seeds = seeds(v)?,
            "output.dir" => {
                if v.is_empty() {
                    return Err("output directory must not be empty".into());
                }
                self.output_dir = PathBuf::from(v)
            }
            _ => unreachable!("key list and setter disagree on `{key}`"),
        }
        Ok(())
    }

    /// Cross-field checks that do not belong to a single line.
    pub fn validate(&self) -> Result<()> {
        let fail = |m: String| Err(Error::config(m));
        let ds = &self.dataset;
        if !(ds.train_fraction > 0.0 && ds.train_fraction < 1.0) {
            return fail(format!("dataset.train_fraction {} outside (0, 1)", ds.train_fraction));
        }
        if ds.pde.m_t < 2 {
            return fail("dataset.m_t must be at least 2".into());
        }
        if self.seeds.is_empty() {
            return fail("seeds must not be empty".into());
        }
        for &d in std::iter::once(&self.reducer.d).chain(&self.compare.d) {
            let side = (d as f64).sqrt().round() as usize;
            if side * side != d && self.operator.branch == BranchKind::Conv {
                log::warn!("latent dimension {d} is not a perfect square; the conv branch falls back to dense");
            }
        }
        Ok(())
    }

    /// Canonical text: every key in `KEYS` order with its current value.
    pub fn to_text(&self) -> String {
        let ds = &self.dataset;
        let mut s = String::new();
        let mut put = |k: &str, v: String| {
            let _ = writeln!(s, "{k} = {v}");
        };
        put("dataset.nx", ds.grf.nx.to_string());
        put("dataset.ny", ds.grf.ny.to_string());
        put("dataset.n_samples", ds.n_samples.to_string());
        put("dataset.m_t", ds.pde.m_t.to_string());
        put("dataset.train_fraction", format!("{:?}", ds.train_fraction));
        put("dataset.seed", ds.grf.seed.to_string());
        put("dataset.length_scale_x", format!("{:?}", ds.grf.length_scale_x));
        put("dataset.length_scale_y", format!("{:?}", ds.grf.length_scale_y));
        put("dataset.variance", format!("{:?}", ds.grf.variance));
        put("dataset.kle_energy", format!("{:?}", ds.grf.kle_energy));
        put("dataset.diffusivity", format!("{:?}", ds.pde.diffusivity));
        put("dataset.reaction_rate", format!("{:?}", ds.pde.reaction_rate));
        put("dataset.t_final", format!("{:?}", ds.pde.t_final));
        put("dataset.steps_per_snapshot", ds.pde.steps_per_snapshot.to_string());
        let r = &self.reducer;
        put("reducer.kind", r.kind.to_string());
        put("reducer.d", r.d.to_string());
        put("reducer.epochs", r.epochs.to_string());
        put("reducer.batch", r.batch.to_string());
        put("reducer.lr", format!("{:?}", r.lr));
        put(
            "reducer.mode",
            match r.mode {
                SnapshotMode::Combined => "combined",
                SnapshotMode::OutputsOnly => "outputs",
                SnapshotMode::InputsOnly => "inputs",
            }
            .into(),
        );
        put("reducer.widths", r.widths.as_deref().map_or("auto".into(), join));
        let o = &self.operator;
        put("operator.mode", o.model.to_string());
        put("operator.p", o.p.to_string());
        put("operator.epochs", o.epochs.to_string());
        put("operator.batch", o.batch.to_string());
        put("operator.lr", format!("{:?}", o.lr));
        put("operator.branch", o.branch.to_string());
        put("operator.trunk_width", o.trunk_width.to_string());
        put("operator.trunk_depth", o.trunk_depth.to_string());
        put("operator.decode_in_loss", "false".into());
        put("fno.width", self.fno.width.to_string());
        put("fno.layers", self.fno.layers.to_string());
        put("fno.modes", self.fno.modes.to_string());
        put("compare.models", join(&self.compare.models));
        put("compare.reducers", join(&self.compare.reducers));
        put("compare.d", join(&self.compare.d));
        put(
            "evaluate.split",
            match self.eval_split {
                Split::Train => "train",
                Split::Test => "test",
                Split::All => "all",
            }
            .into(),
        );
        put("seeds", join(&self.seeds));
        put("output.dir", self.output_dir.display().to_string());
        s
    }

    /// First 16 hex digits of SHA-256 over the canonical text, excluding the
    /// output directory (it does not affect results).
    pub fn hash(&self) -> String {
        let text: String = self
            .to_text()
            .lines()
            .filter(|l| !l.starts_with("output.dir"))
            .flat_map(|l| [l, "\n"])
            .collect();
        let digest = Sha256::digest(text.as_bytes());
        digest.iter().take(8).map(|b| format!("{b:02x}")).collect()
    }
}
