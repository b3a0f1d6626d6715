//! Central-difference gradient oracle. Uses only `forward` and `loss_mse`,
//! never the analytic backward pass it is compared against.

#![allow(dead_code)]

use perfgan::nn::{loss_mse, Activation, LayerSpec, Matrix, NetworkState, NetworkTopology};
use rand::Rng;

pub const FD_STEP: f64 = 1e-5;

/// Identifies one scalar parameter.
#[derive(Debug, Clone, Copy)]
pub enum Param {
    Weight { layer: usize, row: usize, col: usize },
    Bias { layer: usize, unit: usize },
}

pub fn all_params(state: &NetworkState) -> Vec<Param> {
    let mut out = Vec::new();
    for (layer, w) in state.weights().iter().enumerate() {
        for row in 0..w.rows() {
            for col in 0..w.cols() {
                out.push(Param::Weight { layer, row, col });
            }
        }
        for unit in 0..state.biases()[layer].len() {
            out.push(Param::Bias { layer, unit });
        }
    }
    out
}

pub fn perturbed(state: &NetworkState, p: Param, delta: f64) -> NetworkState {
    let mut weights = state.weights().to_vec();
    let mut biases = state.biases().to_vec();
    match p {
        Param::Weight { layer, row, col } => {
            let v = weights[layer].get(row, col);
            weights[layer].set(row, col, v + delta);
        }
        Param::Bias { layer, unit } => biases[layer][unit] += delta,
    }
    NetworkState::from_parameters(state.topology().clone(), weights, biases).unwrap()
}

pub fn central_difference(f: impl Fn(f64) -> f64) -> f64 {
    (f(FD_STEP) - f(-FD_STEP)) / (2.0 * FD_STEP)
}

/// Relative error ≤ 1e-5, or absolute ≤ 1e-8 where both magnitudes < 1e-3.
pub fn gradients_agree(analytic: f64, numeric: f64) -> bool {
    let diff = (analytic - numeric).abs();
    let scale = analytic.abs().max(numeric.abs());
    if scale < 1e-3 {
        diff <= 1e-8
    } else {
        diff / scale <= 1e-5
    }
}

pub fn random_matrix<R: Rng>(rng: &mut R, rows: usize, cols: usize, range: f64) -> Matrix {
    let data = (0..rows * cols).map(|_| rng.gen_range(-range..range)).collect();
    Matrix::from_vec(rows, cols, data).unwrap()
}

pub fn random_topology<R: Rng>(rng: &mut R) -> NetworkTopology {
    let acts = [Activation::Tanh, Activation::Relu, Activation::Linear];
    let depth = rng.gen_range(1..=3);
    let layers = (0..depth)
        .map(|_| LayerSpec::new(rng.gen_range(1..=6), acts[rng.gen_range(0..3)]))
        .collect();
    NetworkTopology::new(rng.gen_range(1..=5), layers).unwrap()
}

/// Glorot weights plus random biases. Non-zero biases keep relu
/// pre-activations off the kink at exactly 0, where a central difference
/// does not estimate a derivative.
pub fn random_state<R: Rng>(rng: &mut R, topology: NetworkTopology) -> NetworkState {
    let base = NetworkState::init(topology.clone(), rng);
    let biases = base
        .biases()
        .iter()
        .map(|b| b.iter().map(|_| rng.gen_range(-0.5..0.5)).collect())
        .collect();
    NetworkState::from_parameters(topology, base.weights().to_vec(), biases).unwrap()
}

/// First agreement failure of one network/batch, `None` if all agree.
pub fn check_network_gradients(state: &NetworkState, x: &Matrix, y: &Matrix) -> Option<String> {
    let g = state.backward(x, y).unwrap();
    for p in all_params(state) {
        let analytic = match p {
            Param::Weight { layer, row, col } => g.weight_grads[layer].get(row, col),
            Param::Bias { layer, unit } => g.bias_grads[layer][unit],
        };
        let numeric = central_difference(|d| {
            loss_mse(&perturbed(state, p, d).forward(x).unwrap(), y).unwrap()
        });
        if !gradients_agree(analytic, numeric) {
            return Some(format!("{p:?}: analytic {analytic}, numeric {numeric}"));
        }
    }
    for r in 0..x.rows() {
        for c in 0..x.cols() {
            let numeric = central_difference(|d| {
                let mut xp = x.clone();
                xp.set(r, c, x.get(r, c) + d);
                loss_mse(&state.forward(&xp).unwrap(), y).unwrap()
            });
            let analytic = g.input_grad.get(r, c);
            if !gradients_agree(analytic, numeric) {
                return Some(format!("input ({r},{c}): analytic {analytic}, numeric {numeric}"));
            }
        }
    }
    None
}
