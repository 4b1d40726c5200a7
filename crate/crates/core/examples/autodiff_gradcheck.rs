// Builds a small conv → dense network on the tape, takes one backward pass
// and checks the gradients against central differences.

use ldon::rng::Normal;
use ldon::tensor::{gradcheck, Tape, Tensor};

pub fn run_example() -> ldon::Result<f64> {
    let mut g = Normal::from_seed(7);
    let mut rand = |shape: &[usize], scale: f64| Tensor::from_fn(shape, |_| scale * g.sample());
    let x = rand(&[2, 1, 4, 4], 1.0);
    let kernel = rand(&[3, 1, 3, 3], 0.4);
    let w = rand(&[48, 2], 0.2);
    let b = rand(&[2], 0.1);
    let target = rand(&[2, 2], 0.5);

    let net = |t: &mut Tape, v: &[ldon::tensor::Var]| {
        let h = t.conv2d(v[0], v[1])?;
        let h = t.sine(h)?;
        let h = t.reshape(h, &[2, 48])?;
        let h = t.matmul(h, v[2])?;
        let h = t.add(h, v[3])?;
        let y = t.sigmoid(h)?;
        let target = t.constant(target.clone());
        t.mse(y, target)
    };

    let mut tape = Tape::new();
    let leaves: Vec<_> = [&x, &kernel, &w, &b].iter().map(|p| tape.leaf((*p).clone())).collect();
    let loss = net(&mut tape, &leaves)?;
    let grads = tape.backward(loss)?;
    println!("loss {:.6}", tape.value(loss).item());
    println!("|dL/dkernel|max {:.3e}", grads.get(leaves[1]).data().iter().fold(0.0f64, |m, v| m.max(v.abs())));

    let worst = gradcheck(&[x, kernel, w, b], net)?;
    println!("worst relative error vs finite differences: {worst:.2e}");
    Ok(worst)
}

#[allow(dead_code)]
fn main() -> ldon::Result<()> {
    run_example().map(|_| ())
}
