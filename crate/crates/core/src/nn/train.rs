use rand::seq::SliceRandom;
use rand::Rng;

use super::{loss_mse, Matrix, NetworkState, RmspropState};
use crate::error::{Error, Result};

/// Minibatch RMSprop regression on `inputs → targets` under MSE.
///
/// Each epoch visits the dataset once in an order shuffled with `rng`.
/// Returns the MSE of the final parameters over the whole dataset, so with
/// `epochs == 0` it is the loss of the untouched network.
pub fn train_epochs<R: Rng + ?Sized>(
    state: &mut NetworkState,
    opt: &mut RmspropState,
    inputs: &Matrix,
    targets: &Matrix,
    epochs: usize,
    minibatch: usize,
    rng: &mut R,
) -> Result<f64> {
    if inputs.rows() == 0 {
        return Err(Error::contract("cannot train on an empty dataset"));
    }
    if inputs.rows() != targets.rows() {
        return Err(Error::contract(format!(
            "{} inputs but {} targets",
            inputs.rows(),
            targets.rows()
        )));
    }
    if minibatch == 0 {
        return Err(Error::contract("minibatch size must be at least 1"));
    }
    let mut order: Vec<usize> = (0..inputs.rows()).collect();
    for _ in 0..epochs {
        order.shuffle(rng);
        for chunk in order.chunks(minibatch) {
            let x = inputs.select_rows(chunk);
            let y = targets.select_rows(chunk);
            let grads = state.backward(&x, &y)?;
            opt.step(state, &grads)?;
        }
    }
    loss_mse(&state.forward(inputs)?, targets)
}
