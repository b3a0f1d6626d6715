//! Dense feed-forward networks with exact reverse-mode gradients.
//!
//! Each layer computes `out = act(in · W + b)` with `W` stored as a
//! `fan_in × fan_out` matrix, so a batch is a `batch × features` matrix and
//! the whole forward pass is a chain of right-multiplications.

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::Matrix;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Activation {
    Tanh,
    Relu,
    Linear,
}

impl Activation {
    #[inline]
    fn apply(self, z: f64) -> f64 {
        match self {
            Activation::Tanh => z.tanh(),
            Activation::Relu => z.max(0.0),
            Activation::Linear => z,
        }
    }

    /// Derivative expressed in terms of the activation's output.
    #[inline]
    fn derivative_from_output(self, y: f64) -> f64 {
        match self {
            Activation::Tanh => 1.0 - y * y,
            Activation::Relu => {
                if y > 0.0 {
                    1.0
                } else {
                    0.0
                }
            }
            Activation::Linear => 1.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct LayerSpec {
    pub units: usize,
    pub activation: Activation,
}

impl LayerSpec {
    pub fn new(units: usize, activation: Activation) -> Self {
        Self { units, activation }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct NetworkTopology {
    input_dim: usize,
    layers: Vec<LayerSpec>,
}

impl NetworkTopology {
    pub fn new(input_dim: usize, layers: Vec<LayerSpec>) -> Result<Self> {
        if input_dim == 0 {
            return Err(Error::contract("network input_dim must be at least 1"));
        }
        if layers.is_empty() {
            return Err(Error::contract("network needs at least one layer"));
        }
        if let Some(i) = layers.iter().position(|l| l.units == 0) {
            return Err(Error::contract(format!("layer {i} has zero units")));
        }
        Ok(Self { input_dim, layers })
    }

    pub fn input_dim(&self) -> usize {
        self.input_dim
    }

    pub fn output_dim(&self) -> usize {
        self.layers.last().map_or(0, |l| l.units)
    }

    pub fn layers(&self) -> &[LayerSpec] {
        &self.layers
    }

    /// `(fan_in, fan_out)` of every layer.
    pub fn layer_shapes(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        let fan_ins = std::iter::once(self.input_dim).chain(self.layers.iter().map(|l| l.units));
        fan_ins.zip(self.layers.iter().map(|l| l.units))
    }

    pub fn parameter_count(&self) -> usize {
        self.layer_shapes().map(|(i, o)| i * o + o).sum()
    }
}

/// Parameters of a dense network.
#[derive(Debug, Clone, PartialEq)]
pub struct NetworkState {
    topology: NetworkTopology,
    weights: Vec<Matrix>,
    biases: Vec<Vec<f64>>,
}

/// Gradients of a scalar loss with respect to every parameter and to the
/// network input.
#[derive(Debug, Clone, PartialEq)]
pub struct Gradients {
    pub weight_grads: Vec<Matrix>,
    pub bias_grads: Vec<Vec<f64>>,
    pub input_grad: Matrix,
}

impl Gradients {
    pub fn is_zero(&self) -> bool {
        self.weight_grads
            .iter()
            .all(|w| w.data().iter().all(|&g| g == 0.0))
            && self.bias_grads.iter().flatten().all(|&g| g == 0.0)
    }
}

/// Layer outputs recorded during a forward pass; `outputs[0]` is the input.
#[derive(Debug, Clone)]
pub(crate) struct ForwardTrace {
    outputs: Vec<Matrix>,
}

impl ForwardTrace {
    pub(crate) fn output(&self) -> &Matrix {
        self.outputs.last().expect("trace holds at least the input")
    }
}

impl NetworkState {
    /// Glorot-uniform weights, zero biases.
    pub fn init<R: Rng + ?Sized>(topology: NetworkTopology, rng: &mut R) -> Self {
        let mut weights = Vec::with_capacity(topology.layers.len());
        let mut biases = Vec::with_capacity(topology.layers.len());
        for (fan_in, fan_out) in topology.layer_shapes() {
            let limit = (6.0 / (fan_in + fan_out) as f64).sqrt();
            let data = (0..fan_in * fan_out)
                .map(|_| rng.gen_range(-limit..=limit))
                .collect();
            weights.push(Matrix::from_vec(fan_in, fan_out, data).expect("shape by construction"));
            biases.push(vec![0.0; fan_out]);
        }
        Self {
            topology,
            weights,
            biases,
        }
    }

    /// All parameters zero.
    pub fn zeros(topology: NetworkTopology) -> Self {
        let (weights, biases) = topology
            .layer_shapes()
            .map(|(i, o)| (Matrix::zeros(i, o), vec![0.0; o]))
            .unzip();
        Self {
            topology,
            weights,
            biases,
        }
    }

    /// Builds a state from explicit parameters, checking that shapes chain.
    pub fn from_parameters(
        topology: NetworkTopology,
        weights: Vec<Matrix>,
        biases: Vec<Vec<f64>>,
    ) -> Result<Self> {
        let n = topology.layers.len();
        if weights.len() != n || biases.len() != n {
            return Err(Error::contract(format!(
                "expected {n} weight matrices and bias vectors, got {} and {}",
                weights.len(),
                biases.len()
            )));
        }
        for (l, ((fan_in, fan_out), (w, b))) in topology
            .layer_shapes()
            .zip(weights.iter().zip(&biases))
            .enumerate()
        {
            if w.shape() != (fan_in, fan_out) || b.len() != fan_out {
                return Err(Error::contract(format!(
                    "layer {l}: expected weights {fan_in}x{fan_out} and {fan_out} biases, got {:?} and {}",
                    w.shape(),
                    b.len()
                )));
            }
            if !w.is_finite() || b.iter().any(|v| !v.is_finite()) {
                return Err(Error::contract(format!("layer {l}: non-finite parameter")));
            }
        }
        Ok(Self {
            topology,
            weights,
            biases,
        })
    }

    pub fn topology(&self) -> &NetworkTopology {
        &self.topology
    }

    pub fn weights(&self) -> &[Matrix] {
        &self.weights
    }

    pub fn biases(&self) -> &[Vec<f64>] {
        &self.biases
    }

    pub(crate) fn weights_mut(&mut self) -> &mut [Matrix] {
        &mut self.weights
    }

    pub(crate) fn biases_mut(&mut self) -> &mut [Vec<f64>] {
        &mut self.biases
    }

    pub fn parameter_count(&self) -> usize {
        self.topology.parameter_count()
    }

    pub fn is_finite(&self) -> bool {
        self.weights.iter().all(Matrix::is_finite)
            && self.biases.iter().flatten().all(|v| v.is_finite())
    }

    /// Forward pass over a `batch × input_dim` matrix.
    pub fn forward(&self, inputs: &Matrix) -> Result<Matrix> {
        let mut trace = self.forward_trace(inputs)?;
        Ok(trace.outputs.pop().expect("trace holds at least the input"))
    }

    pub(crate) fn forward_trace(&self, inputs: &Matrix) -> Result<ForwardTrace> {
        if inputs.cols() != self.topology.input_dim {
            return Err(Error::contract(format!(
                "input has {} columns, network expects {}",
                inputs.cols(),
                self.topology.input_dim
            )));
        }
        let mut outputs = Vec::with_capacity(self.weights.len() + 1);
        outputs.push(inputs.clone());
        for ((w, b), spec) in self
            .weights
            .iter()
            .zip(&self.biases)
            .zip(&self.topology.layers)
        {
            let mut z = outputs.last().expect("non-empty").matmul(w);
            z.add_row_vector(b);
            for v in z.data_mut() {
                *v = spec.activation.apply(*v);
            }
            outputs.push(z);
        }
        Ok(ForwardTrace { outputs })
    }

    /// Gradients of `loss_mse(forward(inputs), targets)`.
    pub fn backward(&self, inputs: &Matrix, targets: &Matrix) -> Result<Gradients> {
        let trace = self.forward_trace(inputs)?;
        let output_grad = mse_output_grad(trace.output(), targets)?;
        Ok(self.backward_trace(&trace, output_grad))
    }

    /// Backpropagates `output_grad` (dL/d output) through a recorded pass.
    pub(crate) fn backward_trace(&self, trace: &ForwardTrace, output_grad: Matrix) -> Gradients {
        let n = self.weights.len();
        let mut weight_grads = vec![Matrix::zeros(0, 0); n];
        let mut bias_grads = vec![Vec::new(); n];
        let mut delta = output_grad;
        for l in (0..n).rev() {
            let activation = self.topology.layers[l].activation;
            let out = &trace.outputs[l + 1];
            for (d, &y) in delta.data_mut().iter_mut().zip(out.data()) {
                *d *= activation.derivative_from_output(y);
            }
            weight_grads[l] = trace.outputs[l].t_matmul(&delta);
            bias_grads[l] = delta.column_sums();
            delta = delta.matmul_t(&self.weights[l]);
        }
        Gradients {
            weight_grads,
            bias_grads,
            input_grad: delta,
        }
    }
}

/// Mean over all entries of the squared error.
pub fn loss_mse(predictions: &Matrix, targets: &Matrix) -> Result<f64> {
    check_same_shape(predictions, targets)?;
    let n = predictions.data().len();
    if n == 0 {
        return Ok(0.0);
    }
    let sum: f64 = predictions
        .data()
        .iter()
        .zip(targets.data())
        .map(|(p, t)| (p - t) * (p - t))
        .sum();
    Ok(sum / n as f64)
}

/// dL/dpredictions for `loss_mse`.
pub(crate) fn mse_output_grad(predictions: &Matrix, targets: &Matrix) -> Result<Matrix> {
    check_same_shape(predictions, targets)?;
    let n = predictions.data().len().max(1) as f64;
    let data = predictions
        .data()
        .iter()
        .zip(targets.data())
        .map(|(p, t)| 2.0 * (p - t) / n)
        .collect();
    Matrix::from_vec(predictions.rows(), predictions.cols(), data)
}

fn check_same_shape(a: &Matrix, b: &Matrix) -> Result<()> {
    if a.shape() != b.shape() {
        return Err(Error::contract(format!(
            "shape mismatch: {:?} vs {:?}",
            a.shape(),
            b.shape()
        )));
    }
    Ok(())
}
