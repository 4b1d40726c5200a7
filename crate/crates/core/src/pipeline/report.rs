//! Per-run metrics and CSV output.

use std::path::Path;

use crate::dimred::fmt_f64;
use crate::error::{Error, Result};
use crate::pipeline::container::{write_atomic, Manifest};

use super::config::ModelKind;

/// Outcome of one training run. Timings are kept apart from the persisted
/// text so reruns produce identical report files.
#[derive(Clone, Debug, PartialEq)]
pub struct RunReport {
    pub config_hash: String,
    pub model: ModelKind,
    /// Reducer kind for latent runs.
    pub reducer: Option<String>,
    pub d: Option<usize>,
    pub seed: u64,
    pub epoch_losses: Vec<f64>,
    pub latent_mse: Option<f64>,
    pub decoded_mse: f64,
    pub param_count: usize,
    pub reducer_param_count: Option<usize>,
    /// Whether the latent model has fewer parameters than the full model
    /// built from the same settings. Filled in by `compare`.
    pub param_ordering_holds: Option<bool>,
    /// `(phase, seconds)` in execution order.
    pub phases: Vec<(String, f64)>,
}

impl RunReport {
    pub fn seconds(&self, phase: &str) -> Option<f64> {
        self.phases.iter().find(|(p, _)| p == phase).map(|&(_, s)| s)
    }

    pub fn to_manifest(&self) -> Manifest {
        let mut m = Manifest::new();
        let losses: Vec<String> = self.epoch_losses.iter().map(|&v| fmt_f64(v)).collect();
        m.set("config_hash", &self.config_hash)
            .set("model", self.model)
            .set("seed", self.seed)
            .set("epoch_losses", losses.join(","))
            .set("decoded_mse", fmt_f64(self.decoded_mse))
            .set("param_count", self.param_count);
        if let Some(r) = &self.reducer {
            m.set("reducer", r);
        }
        if let Some(d) = self.d {
            m.set("d", d);
        }
        if let Some(v) = self.latent_mse {
            m.set("latent_mse", fmt_f64(v));
        }
        if let Some(v) = self.reducer_param_count {
            m.set("reducer_param_count", v);
        }
        if let Some(v) = self.param_ordering_holds {
            m.set("param_ordering_holds", v);
        }
        m
    }

    /// Writes the deterministic part of the report as `key = value` text.
    pub fn write(&self, path: &Path) -> Result<()> {
        write_atomic(path, self.to_manifest().to_text()?.as_bytes())
    }
}

/// Reals with 17 significant digits.
pub fn fmt_real(v: f64) -> String {
    format!("{v:.16e}")
}

/// RFC-4180 CSV with a header row, written atomically.
pub fn write_csv(path: &Path, header: &[&str], rows: &[Vec<String>]) -> Result<()> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header)?;
    for r in rows {
        if r.len() != header.len() {
            return Err(Error::invalid(format!("CSV row has {} fields, header has {}", r.len(), header.len())));
        }
        w.write_record(r)?;
    }
    let bytes = w.into_inner().map_err(|e| Error::Io(e.into_error()))?;
    write_atomic(path, &bytes)
}

pub fn write_timings(path: &Path, reports: &[RunReport]) -> Result<()> {
    let mut rows = Vec::new();
    for r in reports {
        for (phase, s) in &r.phases {
            rows.push(vec![
                r.model.to_string(),
                r.reducer.clone().unwrap_or_default(),
                r.d.map(|d| d.to_string()).unwrap_or_default(),
                r.seed.to_string(),
                phase.clone(),
                fmt_real(*s),
            ]);
        }
    }
    write_csv(path, &["model", "reducer", "d", "seed", "phase", "seconds"], &rows)
}
