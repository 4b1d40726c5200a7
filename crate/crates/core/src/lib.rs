//! Operator learning on latent representations.
//!
//! Input/output fields of a parametric PDE are compressed with a multi-layer
//! autoencoder or PCA, a DeepONet is trained between the latent codes, and
//! predictions are decoded back to physical space. A full-dimensional
//! DeepONet and a small Fourier neural operator serve as baselines.

pub mod datagen;
pub mod dimred;
pub mod error;
pub mod grf;
pub mod linalg;
pub mod operators;
pub mod pipeline;
pub mod rng;
pub mod tensor;

pub use error::{Error, Result};
pub use tensor::Tensor;
