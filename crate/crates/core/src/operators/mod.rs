//! Neural operators: DeepONet on latent codes or full fields, and a 2-D FNO.

pub mod deeponet;
pub mod fno;

pub use deeponet::{
    check_param_ordering, train_deeponet, BranchKind, DeepOnetConfig, DeepOnetModel, OperatorMode, TrainConfig,
    TrainLog,
};
pub use fno::{fno_pairs, train_fno, FnoConfig, FnoModel, FourierLayer};

use crate::dimred::ReducerModel;
use crate::error::{Error, Result};
use crate::tensor::Tensor;

/// Mean squared error over every element.
pub fn evaluate_mse(predictions: &Tensor, references: &Tensor) -> Result<f64> {
    if predictions.shape() != references.shape() {
        return Err(Error::Shape {
            op: "evaluate_mse",
            lhs: predictions.shape().to_vec(),
            rhs: references.shape().to_vec(),
        });
    }
    Ok(crate::dimred::mse(predictions.data(), references.data()))
}

/// Raw input fields `[N, nx·ny]` to raw predicted trajectories
/// `[N, T, nx, ny]`: normalize, encode, run the latent operator, decode and
/// denormalize.
pub fn l_deeponet_predict(
    input_reducer: &ReducerModel,
    output_reducer: &ReducerModel,
    model: &DeepOnetModel,
    x_raw: &Tensor,
    zeta: &[f64],
) -> Result<Tensor> {
    let c = &model.config;
    if c.mode != OperatorMode::Latent {
        return Err(Error::invalid("l_deeponet_predict needs a latent-mode DeepONet"));
    }
    if c.in_dim != input_reducer.latent_dim || c.out_dim != output_reducer.latent_dim {
        return Err(Error::invalid(format!(
            "operator maps {} -> {} latents but the reducers use {} and {}",
            c.in_dim, c.out_dim, input_reducer.latent_dim, output_reducer.latent_dim
        )));
    }
    let mut x = x_raw.clone();
    input_reducer.input_norm.normalize_in_place(x.data_mut());
    let latent = model.forward(&input_reducer.encode(&x)?, zeta)?;
    let (n, steps, d) = (latent.shape()[0], latent.shape()[1], latent.shape()[2]);
    let mut decoded = output_reducer.decode(&latent.reshape(&[n * steps, d])?)?;
    output_reducer.output_norm.denormalize_in_place(decoded.data_mut());
    decoded.reshape(&[n, steps, output_reducer.nx, output_reducer.ny])
}
