//! RMSprop: `cache ← ρ·cache + (1−ρ)·g²`, `θ ← θ − lr·g / (√cache + ε)`.

use super::{Gradients, Matrix, NetworkState};
use crate::error::{Error, Result};

pub const DEFAULT_LEARNING_RATE: f64 = 0.001;
pub const DEFAULT_RHO: f64 = 0.9;
pub const DEFAULT_EPSILON: f64 = 1e-8;

#[derive(Debug, Clone, PartialEq)]
pub struct RmspropState {
    learning_rate: f64,
    rho: f64,
    epsilon: f64,
    weight_cache: Vec<Matrix>,
    bias_cache: Vec<Vec<f64>>,
}

impl RmspropState {
    /// Fresh (all-zero) cache shaped like `state`, default hyperparameters.
    pub fn for_network(state: &NetworkState) -> Self {
        Self::with_hyperparams(state, DEFAULT_LEARNING_RATE, DEFAULT_RHO, DEFAULT_EPSILON)
            .expect("defaults are valid")
    }

    pub fn with_hyperparams(
        state: &NetworkState,
        learning_rate: f64,
        rho: f64,
        epsilon: f64,
    ) -> Result<Self> {
        if !(learning_rate > 0.0 && learning_rate.is_finite()) {
            return Err(Error::contract("learning rate must be positive and finite"));
        }
        if !(rho > 0.0 && rho < 1.0) {
            return Err(Error::contract("rho must lie in (0, 1)"));
        }
        if !(epsilon > 0.0 && epsilon.is_finite()) {
            return Err(Error::contract("epsilon must be positive and finite"));
        }
        Ok(Self {
            learning_rate,
            rho,
            epsilon,
            weight_cache: state
                .weights()
                .iter()
                .map(|w| Matrix::zeros(w.rows(), w.cols()))
                .collect(),
            bias_cache: state.biases().iter().map(|b| vec![0.0; b.len()]).collect(),
        })
    }

    pub fn learning_rate(&self) -> f64 {
        self.learning_rate
    }

    pub fn rho(&self) -> f64 {
        self.rho
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    pub fn weight_cache(&self) -> &[Matrix] {
        &self.weight_cache
    }

    pub fn bias_cache(&self) -> &[Vec<f64>] {
        &self.bias_cache
    }

    /// Applies one update to `state` in place.
    pub fn step(&mut self, state: &mut NetworkState, grads: &Gradients) -> Result<()> {
        self.check_shapes(state, grads)?;
        let (lr, rho, eps) = (self.learning_rate, self.rho, self.epsilon);
        let update = |param: &mut f64, cache: &mut f64, g: f64| {
            *cache = rho * *cache + (1.0 - rho) * g * g;
            *param -= lr * g / (cache.sqrt() + eps);
        };
        for ((w, c), g) in state
            .weights_mut()
            .iter_mut()
            .zip(&mut self.weight_cache)
            .zip(&grads.weight_grads)
        {
            for ((p, c), &g) in w.data_mut().iter_mut().zip(c.data_mut()).zip(g.data()) {
                update(p, c, g);
            }
        }
        for ((b, c), g) in state
            .biases_mut()
            .iter_mut()
            .zip(&mut self.bias_cache)
            .zip(&grads.bias_grads)
        {
            for ((p, c), &g) in b.iter_mut().zip(c.iter_mut()).zip(g) {
                update(p, c, g);
            }
        }
        Ok(())
    }

    fn check_shapes(&self, state: &NetworkState, grads: &Gradients) -> Result<()> {
        let layers = state.weights().len();
        let counts_ok = self.weight_cache.len() == layers
            && grads.weight_grads.len() == layers
            && grads.bias_grads.len() == layers;
        let shapes_ok = counts_ok
            && (0..layers).all(|l| {
                let shape = state.weights()[l].shape();
                let units = state.biases()[l].len();
                self.weight_cache[l].shape() == shape
                    && grads.weight_grads[l].shape() == shape
                    && self.bias_cache[l].len() == units
                    && grads.bias_grads[l].len() == units
            });
        if shapes_ok {
            Ok(())
        } else {
            Err(Error::contract(
                "optimizer cache, gradients and network shapes disagree",
            ))
        }
    }
}
