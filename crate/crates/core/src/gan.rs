//! Online GAN: a generator proposing normalized test inputs and a
//! discriminator regressing their fitness, both trained from the growing
//! test suite only.
//!
//! Training runs in two phases. The discriminator is first fit to the
//! executed tests; then it is frozen and the generator is trained so that
//! the discriminator scores its samples as 1.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::nn::{
    mse_output_grad, train_epochs, Activation, Gradients, LayerSpec, Matrix, NetworkState,
    NetworkTopology, RmspropState,
};
use crate::space::DIMS;

pub const LATENT_DIM: usize = 100;
const GENERATOR_HIDDEN: usize = 128;
const DISCRIMINATOR_HIDDEN: usize = 8;

/// 100 → 128, 128, 128 (tanh) → 6 (tanh).
pub fn generator_topology() -> NetworkTopology {
    NetworkTopology::new(
        LATENT_DIM,
        vec![
            LayerSpec::new(GENERATOR_HIDDEN, Activation::Tanh),
            LayerSpec::new(GENERATOR_HIDDEN, Activation::Tanh),
            LayerSpec::new(GENERATOR_HIDDEN, Activation::Tanh),
            LayerSpec::new(DIMS, Activation::Tanh),
        ],
    )
    .expect("fixed topology is valid")
}

/// 6 → 8, 8, 8 (tanh) → 1 (relu).
pub fn discriminator_topology() -> NetworkTopology {
    NetworkTopology::new(
        DIMS,
        vec![
            LayerSpec::new(DISCRIMINATOR_HIDDEN, Activation::Tanh),
            LayerSpec::new(DISCRIMINATOR_HIDDEN, Activation::Tanh),
            LayerSpec::new(DISCRIMINATOR_HIDDEN, Activation::Tanh),
            LayerSpec::new(1, Activation::Relu),
        ],
    )
    .expect("fixed topology is valid")
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GanHyperparams {
    pub disc_epochs: usize,
    pub gen_epochs: usize,
    /// Latent samples per generator epoch; `None` means `max(32, |suite|)`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gen_samples_per_round: Option<usize>,
    pub minibatch: usize,
}

impl Default for GanHyperparams {
    fn default() -> Self {
        Self {
            disc_epochs: 10,
            gen_epochs: 10,
            gen_samples_per_round: None,
            minibatch: 32,
        }
    }
}

impl GanHyperparams {
    pub fn validate(&self) -> Result<()> {
        let fields = [
            ("disc_epochs", Some(self.disc_epochs)),
            ("gen_epochs", Some(self.gen_epochs)),
            ("gen_samples_per_round", self.gen_samples_per_round),
            ("minibatch", Some(self.minibatch)),
        ];
        for (name, v) in fields {
            if v == Some(0) {
                return Err(Error::contract(format!("{name} must be at least 1")));
            }
        }
        Ok(())
    }

    pub fn samples_per_round(&self, suite_len: usize) -> usize {
        self.gen_samples_per_round
            .unwrap_or_else(|| suite_len.max(32))
    }
}

/// A fitness regressor over normalized inputs, the surrogate model shared
/// by the DN and GAN algorithms.
#[derive(Debug, Clone, PartialEq)]
pub struct Discriminator {
    net: NetworkState,
    opt: RmspropState,
}

impl Discriminator {
    pub fn init<R: Rng + ?Sized>(rng: &mut R) -> Self {
        Self::from_network(NetworkState::init(discriminator_topology(), rng))
            .expect("fixed topology")
    }

    pub fn from_network(net: NetworkState) -> Result<Self> {
        let t = net.topology();
        if t.input_dim() != DIMS || t.output_dim() != 1 {
            return Err(Error::contract(format!(
                "discriminator must map {DIMS} inputs to 1 output, got {} -> {}",
                t.input_dim(),
                t.output_dim()
            )));
        }
        let opt = RmspropState::for_network(&net);
        Ok(Self { net, opt })
    }

    /// Zero weights and an output bias of `value`: predicts `relu(value)`
    /// everywhere.
    pub fn constant(value: f64) -> Self {
        let mut net = NetworkState::zeros(discriminator_topology());
        let mut biases = net.biases().to_vec();
        *biases.last_mut().and_then(|b| b.first_mut()).expect("output bias") = value;
        net = NetworkState::from_parameters(
            net.topology().clone(),
            net.weights().to_vec(),
            biases,
        )
        .expect("shapes unchanged");
        Self::from_network(net).expect("fixed topology")
    }

    pub fn network(&self) -> &NetworkState {
        &self.net
    }

    pub fn optimizer(&self) -> &RmspropState {
        &self.opt
    }

    /// Raw relu outputs; not clamped above 1.
    pub fn predict(&self, inputs: &Matrix) -> Result<Vec<f64>> {
        Ok(self.net.forward(inputs)?.data().to_vec())
    }

    /// Fits `inputs → fitness` for `hp.disc_epochs` epochs; returns the
    /// resulting MSE over the training set.
    pub fn train<R: Rng + ?Sized>(
        &mut self,
        inputs: &Matrix,
        fitness: &[f64],
        hp: &GanHyperparams,
        rng: &mut R,
    ) -> Result<f64> {
        if inputs.rows() == 0 {
            return Err(Error::contract("cannot train the discriminator on an empty suite"));
        }
        if fitness.len() != inputs.rows() {
            return Err(Error::contract(format!(
                "{} inputs but {} fitness values",
                inputs.rows(),
                fitness.len()
            )));
        }
        if let Some(f) = fitness.iter().find(|f| !(0.0..=1.0).contains(*f)) {
            return Err(Error::contract(format!("fitness {f} outside [0, 1]")));
        }
        let targets = Matrix::from_vec(fitness.len(), 1, fitness.to_vec())?;
        train_epochs(
            &mut self.net,
            &mut self.opt,
            inputs,
            &targets,
            hp.disc_epochs,
            hp.minibatch,
            rng,
        )
    }

    pub fn mse(&self, inputs: &Matrix, fitness: &[f64]) -> Result<f64> {
        let targets = Matrix::from_vec(fitness.len(), 1, fitness.to_vec())?;
        crate::nn::loss_mse(&self.net.forward(inputs)?, &targets)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GanModel {
    generator: NetworkState,
    gen_opt: RmspropState,
    discriminator: Discriminator,
}

impl GanModel {
    /// Fresh Glorot-initialized generator and discriminator.
    pub fn init<R: Rng + ?Sized>(rng: &mut R) -> Self {
        let generator = NetworkState::init(generator_topology(), rng);
        let discriminator = Discriminator::init(rng);
        Self::from_parts(generator, discriminator).expect("fixed topologies")
    }

    pub fn from_parts(generator: NetworkState, discriminator: Discriminator) -> Result<Self> {
        let t = generator.topology();
        if t.output_dim() != DIMS {
            return Err(Error::contract(format!(
                "generator must emit {DIMS} values, got {}",
                t.output_dim()
            )));
        }
        let gen_opt = RmspropState::for_network(&generator);
        Ok(Self {
            generator,
            gen_opt,
            discriminator,
        })
    }

    pub fn latent_dim(&self) -> usize {
        self.generator.topology().input_dim()
    }

    pub fn generator(&self) -> &NetworkState {
        &self.generator
    }

    pub fn discriminator(&self) -> &Discriminator {
        &self.discriminator
    }

    fn latent_batch<R: Rng + ?Sized>(&self, k: usize, rng: &mut R) -> Matrix {
        let dim = self.latent_dim();
        let data = (0..k * dim).map(|_| rng.gen_range(-1.0..1.0)).collect();
        Matrix::from_vec(k, dim, data).expect("shape by construction")
    }

    /// `k` generator outputs from fresh `U(-1, 1)` latent vectors.
    pub fn sample_candidates<R: Rng + ?Sized>(&self, k: usize, rng: &mut R) -> Result<Matrix> {
        if k == 0 {
            return Err(Error::contract("must sample at least one candidate"));
        }
        let z = self.latent_batch(k, rng);
        self.generator.forward(&z)
    }

    pub fn predict_fitness(&self, inputs: &Matrix) -> Result<Vec<f64>> {
        self.discriminator.predict(inputs)
    }

    /// Phase one. The generator is untouched.
    pub fn train_discriminator<R: Rng + ?Sized>(
        &mut self,
        inputs: &Matrix,
        fitness: &[f64],
        hp: &GanHyperparams,
        rng: &mut R,
    ) -> Result<f64> {
        self.discriminator.train(inputs, fitness, hp, rng)
    }

    /// Gradients of `mse(D(G(z)), 1)` with respect to the generator, with
    /// the discriminator held fixed.
    pub fn generator_gradients(&self, latent: &Matrix) -> Result<Gradients> {
        let gen_trace = self.generator.forward_trace(latent)?;
        let disc = &self.discriminator.net;
        let disc_trace = disc.forward_trace(gen_trace.output())?;
        let ones = Matrix::from_vec(latent.rows(), 1, vec![1.0; latent.rows()])?;
        let disc_grads = disc.backward_trace(&disc_trace, mse_output_grad(disc_trace.output(), &ones)?);
        Ok(self.generator.backward_trace(&gen_trace, disc_grads.input_grad))
    }

    /// Phase two. Only generator parameters move.
    pub fn train_generator<R: Rng + ?Sized>(
        &mut self,
        hp: &GanHyperparams,
        suite_len: usize,
        rng: &mut R,
    ) -> Result<()> {
        hp.validate()?;
        let samples = hp.samples_per_round(suite_len);
        for _ in 0..hp.gen_epochs {
            let z = self.latent_batch(samples, rng);
            let rows: Vec<usize> = (0..samples).collect();
            for chunk in rows.chunks(hp.minibatch) {
                let grads = self.generator_gradients(&z.select_rows(chunk))?;
                self.gen_opt.step(&mut self.generator, &grads)?;
            }
        }
        Ok(())
    }

    /// Discriminator phase, then generator phase, on one rng stream.
    pub fn train_gan<R: Rng + ?Sized>(
        &mut self,
        inputs: &Matrix,
        fitness: &[f64],
        hp: &GanHyperparams,
        rng: &mut R,
    ) -> Result<()> {
        self.train_discriminator(inputs, fitness, hp, rng)?;
        self.train_generator(hp, inputs.rows(), rng)
    }
}
