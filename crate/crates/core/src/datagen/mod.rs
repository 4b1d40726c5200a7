//! Labeled datasets (input field → output trajectory) and analytic initial
//! conditions.

mod diffusion;
pub mod ics;

pub use diffusion::{
    generate_diffusion_dataset, sample_seed, simulate, DatasetConfig, DiffusionParams, MAX_EXTENT,
    STABILITY_LIMIT,
};
pub use ics::{
    balanced_height, height_perturbation, strain_history, zonal_jet_u, CrackParams, JetParams,
    PerturbParams,
};

use std::path::Path;

use crate::dimred::{fmt_f64, tensor_vec, vec_tensor};
use crate::error::{Error, Result};
use crate::pipeline::container::{Container, Manifest};
use crate::tensor::Tensor;

/// Affine map of `[min, max]` onto `[0, 1]`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MinMax {
    pub min: f64,
    pub max: f64,
}

impl MinMax {
    pub fn fit(values: &[f64]) -> Self {
        let min = values.iter().cloned().fold(f64::INFINITY, f64::min);
        let max = values.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        Self { min, max }
    }

    fn range(&self) -> f64 {
        let r = self.max - self.min;
        if r > 0.0 {
            r
        } else {
            1.0
        }
    }

    pub fn normalize(&self, v: f64) -> f64 {
        (v - self.min) / self.range()
    }

    pub fn denormalize(&self, v: f64) -> f64 {
        v * self.range() + self.min
    }

    pub fn normalize_in_place(&self, values: &mut [f64]) {
        values.iter_mut().for_each(|v| *v = self.normalize(*v));
    }

    pub fn denormalize_in_place(&self, values: &mut [f64]) {
        values.iter_mut().for_each(|v| *v = self.denormalize(*v));
    }
}

/// Normalized inputs `[N, nx·ny]` and outputs `[N, m_t, nx·ny]`.
///
/// Rows `0..n_train` form the training split; the normalization constants
/// are fitted on that split only, so test values may leave `[0, 1]`.
#[derive(Clone, Debug, PartialEq)]
pub struct FieldDataset {
    pub nx: usize,
    pub ny: usize,
    pub time: Vec<f64>,
    pub inputs: Tensor,
    pub outputs: Tensor,
    pub input_norm: MinMax,
    pub output_norm: MinMax,
    pub n_train: usize,
}

impl FieldDataset {
    pub fn len(&self) -> usize {
        self.inputs.shape()[0]
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn m_t(&self) -> usize {
        self.time.len()
    }

    pub fn points(&self) -> usize {
        self.nx * self.ny
    }

    /// Rows `range`, keeping the normalization. `n_train` counts how many
    /// of the selected rows belong to the training split.
    pub fn subset(&self, range: std::ops::Range<usize>) -> FieldDataset {
        let idx: Vec<usize> = range.clone().collect();
        assert!(!idx.is_empty() && range.end <= self.len(), "bad subset {range:?}");
        FieldDataset {
            nx: self.nx,
            ny: self.ny,
            time: self.time.clone(),
            inputs: self.inputs.select_rows(&idx),
            outputs: self.outputs.select_rows(&idx),
            input_norm: self.input_norm,
            output_norm: self.output_norm,
            n_train: self.n_train.clamp(range.start, range.end) - range.start,
        }
    }

    pub fn train(&self) -> FieldDataset {
        self.subset(0..self.n_train)
    }

    pub fn test(&self) -> FieldDataset {
        self.subset(self.n_train..self.len())
    }

    /// Outputs in physical units, `[N, m_t, nx·ny]`.
    pub fn raw_outputs(&self) -> Tensor {
        let mut t = self.outputs.clone();
        self.output_norm.denormalize_in_place(t.data_mut());
        t
    }

    pub fn raw_inputs(&self) -> Tensor {
        let mut t = self.inputs.clone();
        self.input_norm.denormalize_in_place(t.data_mut());
        t
    }

    pub fn to_container(&self) -> Container {
        let mut m = Manifest::new();
        m.set("kind", "dataset")
            .set("nx", self.nx)
            .set("ny", self.ny)
            .set("n_train", self.n_train)
            .set("input_min", fmt_f64(self.input_norm.min))
            .set("input_max", fmt_f64(self.input_norm.max))
            .set("output_min", fmt_f64(self.output_norm.min))
            .set("output_max", fmt_f64(self.output_norm.max));
        let mut c = Container::new(m);
        c.push("time", vec_tensor(&self.time));
        c.push("inputs", self.inputs.clone());
        c.push("outputs", self.outputs.clone());
        c
    }

    pub fn from_container(c: &Container) -> Result<Self> {
        let m = &c.manifest;
        if m.get("kind") != Some("dataset") {
            return Err(Error::invalid("container does not hold a dataset"));
        }
        let ds = Self {
            nx: m.parse("nx")?,
            ny: m.parse("ny")?,
            time: tensor_vec(c.get("time")?),
            inputs: c.get("inputs")?.clone(),
            outputs: c.get("outputs")?.clone(),
            input_norm: MinMax {
                min: m.parse("input_min")?,
                max: m.parse("input_max")?,
            },
            output_norm: MinMax {
                min: m.parse("output_min")?,
                max: m.parse("output_max")?,
            },
            n_train: m.parse("n_train")?,
        };
        let (n, t, p) = (ds.inputs.shape()[0], ds.time.len(), ds.nx * ds.ny);
        if ds.inputs.shape() != [n, p] || ds.outputs.shape() != [n, t, p] || ds.n_train > n {
            return Err(Error::invalid("dataset tensors have inconsistent shapes"));
        }
        Ok(ds)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        self.to_container().write(path)
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_container(&Container::read(path)?)
    }
}
