//! Central-difference gradient checking.

use super::{Tape, Tensor, Var};
use crate::error::Result;

/// Finite-difference step.
pub const GRADCHECK_STEP: f64 = 1e-5;

/// Entries where `|analytic| + |numeric|` falls below this are skipped.
pub const GRADCHECK_FLOOR: f64 = 1e-8;

/// Worst relative error between the tape gradient of a scalar loss and
/// central differences, over every element of every input. `build` receives
/// one leaf per input and must return the loss.
pub fn gradcheck(inputs: &[Tensor], build: impl Fn(&mut Tape, &[Var]) -> Result<Var>) -> Result<f64> {
    let mut tape = Tape::new();
    let vars: Vec<Var> = inputs.iter().map(|t| tape.leaf(t.clone())).collect();
    let loss = build(&mut tape, &vars)?;
    let grads = tape.backward(loss)?;
    let eval = |ins: &[Tensor]| -> Result<f64> {
        let mut t = Tape::new();
        let v: Vec<Var> = ins.iter().map(|x| t.leaf(x.clone())).collect();
        let l = build(&mut t, &v)?;
        Ok(t.value(l).item())
    };
    let h = GRADCHECK_STEP;
    let mut worst = 0.0f64;
    let mut probe = inputs.to_vec();
    for (i, x) in inputs.iter().enumerate() {
        let analytic = grads.get(vars[i]);
        for j in 0..x.len() {
            let orig = x.data()[j];
            probe[i].data_mut()[j] = orig + h;
            let up = eval(&probe)?;
            probe[i].data_mut()[j] = orig - h;
            let down = eval(&probe)?;
            probe[i].data_mut()[j] = orig;
            let numeric = (up - down) / (2.0 * h);
            let a = analytic.data()[j];
            if a.abs() + numeric.abs() < GRADCHECK_FLOOR {
                continue;
            }
            worst = worst.max((a - numeric).abs() / a.abs().max(numeric.abs()));
        }
    }
    Ok(worst)
}
