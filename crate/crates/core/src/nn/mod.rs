//! Small dense neural network engine: forward/backward passes, MSE loss,
//! RMSprop and a minibatch training loop.

mod matrix;
mod network;
mod rmsprop;
mod train;

pub use matrix::Matrix;
pub(crate) use network::mse_output_grad;
pub use network::{loss_mse, Activation, Gradients, LayerSpec, NetworkState, NetworkTopology};
pub use rmsprop::{RmspropState, DEFAULT_EPSILON, DEFAULT_LEARNING_RATE, DEFAULT_RHO};
pub use train::train_epochs;
