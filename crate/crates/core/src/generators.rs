//! Budgeted test generation: uniform random search, discriminator-filtered
//! sampling (DN), and the online GAN (OGAN).
//!
//! All three share one warm-up path: the first `warmup` tests are drawn
//! uniformly from the `warmup-sampling` stream, so for a given run seed they
//! produce the same prefix. DN and OGAN then train their model once and
//! switch to the moving-target loop, retraining on the full suite after
//! every executed test.

use std::collections::HashSet;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gan::{Discriminator, GanHyperparams, GanModel};
use crate::nn::Matrix;
use crate::rng::RunStreams;
use crate::space::{InputSpace, NormalizedInput, TestInput, DIMS};
use crate::sut::{FitnessSpec, Sut};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TestRecord {
    pub input: TestInput,
    pub power: f64,
    pub fitness: f64,
    pub inner_iterations: usize,
    pub candidate_trials: usize,
    pub test_index: usize,
    /// Model prediction that passed the moving target (post-warm-up only).
    pub predicted_fitness: Option<f64>,
    /// Moving-target value at acceptance (post-warm-up only).
    pub acceptance_target: Option<f64>,
}

/// Ordered, duplicate-free sequence of executed tests.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct TestSuite {
    records: Vec<TestRecord>,
    executed: HashSet<TestInput>,
}

impl TestSuite {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn records(&self) -> &[TestRecord] {
        &self.records
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn executed(&self) -> &HashSet<TestInput> {
        &self.executed
    }

    pub fn contains(&self, input: &TestInput) -> bool {
        self.executed.contains(input)
    }

    fn push(&mut self, record: TestRecord) -> Result<()> {
        if !self.executed.insert(record.input) {
            return Err(Error::contract(format!(
                "input {:?} already executed",
                record.input.0
            )));
        }
        self.records.push(record);
        Ok(())
    }

    /// Normalized inputs and fitness values, the training set for the models.
    pub fn training_data(&self, space: &InputSpace) -> Result<(Matrix, Vec<f64>)> {
        normalized_matrix(space, self.records.iter().map(|r| &r.input))
            .map(|x| (x, self.records.iter().map(|r| r.fitness).collect()))
    }
}

fn normalized_matrix<'a>(
    space: &InputSpace,
    inputs: impl ExactSizeIterator<Item = &'a TestInput>,
) -> Result<Matrix> {
    let rows = inputs.len();
    let mut data = Vec::with_capacity(rows * DIMS);
    for t in inputs {
        data.extend_from_slice(&space.normalize(t)?.0);
    }
    Matrix::from_vec(rows, DIMS, data)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AlgorithmKind {
    Random,
    Dn,
    Ogan,
}

impl AlgorithmKind {
    pub fn as_str(self) -> &'static str {
        match self {
            AlgorithmKind::Random => "random",
            AlgorithmKind::Dn => "dn",
            AlgorithmKind::Ogan => "ogan",
        }
    }
}

impl std::str::FromStr for AlgorithmKind {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s {
            "random" => Ok(AlgorithmKind::Random),
            "dn" => Ok(AlgorithmKind::Dn),
            "ogan" => Ok(AlgorithmKind::Ogan),
            other => Err(format!("unknown algorithm `{other}` (expected random, dn or ogan)")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AlgorithmConfig {
    pub budget: usize,
    pub warmup: usize,
    pub treducer: f64,
    /// Candidates scored per DN inner iteration.
    pub batchsize: usize,
    pub gan: GanHyperparams,
    /// After this many duplicate snaps within one OGAN inner loop, further
    /// duplicates are replaced by the nearest unexecuted grid point.
    pub dedup_fallback_after: usize,
}

impl Default for AlgorithmConfig {
    fn default() -> Self {
        Self {
            budget: 200,
            warmup: 50,
            treducer: 0.95,
            batchsize: 4,
            gan: GanHyperparams::default(),
            dedup_fallback_after: 50,
        }
    }
}

impl AlgorithmConfig {
    pub fn validate(&self, space: &InputSpace) -> Result<()> {
        if self.budget > space.cardinality() {
            return Err(Error::contract(format!(
                "budget {} exceeds the {} inputs of the space",
                self.budget,
                space.cardinality()
            )));
        }
        if self.warmup > self.budget {
            return Err(Error::contract(format!(
                "warmup {} exceeds budget {}",
                self.warmup, self.budget
            )));
        }
        if !(self.treducer > 0.0 && self.treducer < 1.0) {
            return Err(Error::contract(format!(
                "treducer must lie in (0, 1), got {}",
                self.treducer
            )));
        }
        if self.batchsize == 0 {
            return Err(Error::contract("batchsize must be at least 1"));
        }
        self.gan.validate()
    }
}

/// Acceptance threshold that starts at 1 and shrinks by `treducer` at the
/// top of every inner iteration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MovingTarget {
    value: f64,
    treducer: f64,
    iterations: usize,
}

impl MovingTarget {
    pub fn new(treducer: f64) -> Self {
        Self {
            value: 1.0,
            treducer,
            iterations: 0,
        }
    }

    pub fn decay(&mut self) -> f64 {
        self.value *= self.treducer;
        self.iterations += 1;
        self.value
    }

    pub fn value(&self) -> f64 {
        self.value
    }

    pub fn iterations(&self) -> usize {
        self.iterations
    }
}

/// Fitness regressor used to filter uniform candidates (DN).
pub trait Surrogate {
    fn predict(&self, inputs: &Matrix) -> Result<Vec<f64>>;
    fn fit(&mut self, inputs: &Matrix, fitness: &[f64], hp: &GanHyperparams, rng: &mut dyn rand::RngCore) -> Result<()>;
}

impl Surrogate for Discriminator {
    fn predict(&self, inputs: &Matrix) -> Result<Vec<f64>> {
        Discriminator::predict(self, inputs)
    }

    fn fit(&mut self, inputs: &Matrix, fitness: &[f64], hp: &GanHyperparams, rng: &mut dyn rand::RngCore) -> Result<()> {
        self.train(inputs, fitness, hp, rng).map(|_| ())
    }
}

/// A model that both proposes and scores candidates (OGAN).
pub trait CandidateModel {
    fn propose(&self, rng: &mut dyn rand::RngCore) -> Result<NormalizedInput>;
    fn predict(&self, inputs: &Matrix) -> Result<Vec<f64>>;
    fn fit(&mut self, inputs: &Matrix, fitness: &[f64], hp: &GanHyperparams, rng: &mut dyn rand::RngCore) -> Result<()>;
}

impl CandidateModel for GanModel {
    fn propose(&self, rng: &mut dyn rand::RngCore) -> Result<NormalizedInput> {
        let c = self.sample_candidates(1, rng)?;
        Ok(NormalizedInput::from_slice_clamped(c.row(0)))
    }

    fn predict(&self, inputs: &Matrix) -> Result<Vec<f64>> {
        self.predict_fitness(inputs)
    }

    fn fit(&mut self, inputs: &Matrix, fitness: &[f64], hp: &GanHyperparams, rng: &mut dyn rand::RngCore) -> Result<()> {
        self.train_gan(inputs, fitness, hp, rng)
    }
}

/// One run in progress: executes tests against the SUT and records them.
struct Session<'a, S: Sut + ?Sized> {
    space: &'a InputSpace,
    sut: &'a S,
    spec: &'a FitnessSpec,
    suite: TestSuite,
}

impl<'a, S: Sut + ?Sized> Session<'a, S> {
    fn new(space: &'a InputSpace, sut: &'a S, spec: &'a FitnessSpec) -> Self {
        Self {
            space,
            sut,
            spec,
            suite: TestSuite::new(),
        }
    }

    fn execute(
        &mut self,
        input: TestInput,
        inner_iterations: usize,
        candidate_trials: usize,
        accepted: Option<(f64, f64)>,
    ) -> Result<()> {
        let power = self.sut.measure(self.space, &input)?;
        let fitness = self.spec.fitness(power)?;
        let test_index = self.suite.len();
        self.suite.push(TestRecord {
            input,
            power,
            fitness,
            inner_iterations,
            candidate_trials,
            test_index,
            predicted_fitness: accepted.map(|(p, _)| p),
            acceptance_target: accepted.map(|(_, t)| t),
        })
    }

    /// Uniform tests until the suite holds `until` records.
    fn random_fill<R: Rng + ?Sized>(&mut self, until: usize, rng: &mut R) -> Result<()> {
        while self.suite.len() < until {
            let t = self.space.sample_uniform(self.suite.executed(), 1, rng)?[0];
            self.execute(t, 1, 1, None)?;
        }
        Ok(())
    }

    fn remaining(&self) -> usize {
        self.space.cardinality() - self.suite.len()
    }
}

/// Uniform random search without repetition.
pub fn run_random<S: Sut + ?Sized>(
    space: &InputSpace,
    sut: &S,
    spec: &FitnessSpec,
    cfg: &AlgorithmConfig,
    run_seed: u64,
) -> Result<TestSuite> {
    cfg.validate(space)?;
    let mut streams = RunStreams::new(run_seed);
    let mut session = Session::new(space, sut, spec);
    session.random_fill(cfg.warmup, &mut streams.warmup)?;
    session.random_fill(cfg.budget, &mut streams.warmup)?;
    Ok(session.suite)
}

/// DN with a freshly initialized discriminator.
pub fn run_dn<S: Sut + ?Sized>(
    space: &InputSpace,
    sut: &S,
    spec: &FitnessSpec,
    cfg: &AlgorithmConfig,
    run_seed: u64,
) -> Result<TestSuite> {
    let model = Discriminator::init(&mut RunStreams::new(run_seed).net_init);
    run_dn_with(space, sut, spec, cfg, run_seed, model).map(|(suite, _)| suite)
}

/// DN driven by an arbitrary surrogate; returns the suite and the final model.
pub fn run_dn_with<S: Sut + ?Sized, M: Surrogate>(
    space: &InputSpace,
    sut: &S,
    spec: &FitnessSpec,
    cfg: &AlgorithmConfig,
    run_seed: u64,
    mut model: M,
) -> Result<(TestSuite, M)> {
    cfg.validate(space)?;
    let mut streams = RunStreams::new(run_seed);
    let mut session = Session::new(space, sut, spec);
    session.random_fill(cfg.warmup, &mut streams.warmup)?;
    if !session.suite.is_empty() {
        let (x, f) = session.suite.training_data(space)?;
        model.fit(&x, &f, &cfg.gan, &mut streams.shuffling)?;
    }

    while session.suite.len() < cfg.budget {
        let mut target = MovingTarget::new(cfg.treducer);
        let mut trials = 0;
        let (best, prediction) = loop {
            target.decay();
            let batch = cfg.batchsize.min(session.remaining());
            let candidates = space.sample_uniform(session.suite.executed(), batch, &mut streams.dn_sampling)?;
            trials += batch;
            let x = normalized_matrix(space, candidates.iter())?;
            let predictions = model.predict(&x)?;
            let (i, p) = argmax(&predictions);
            if p >= target.value() {
                break (candidates[i], p);
            }
        };
        session.execute(best, target.iterations(), trials, Some((prediction, target.value())))?;
        let (x, f) = session.suite.training_data(space)?;
        model.fit(&x, &f, &cfg.gan, &mut streams.shuffling)?;
    }
    Ok((session.suite, model))
}

/// First index of the largest value.
fn argmax(values: &[f64]) -> (usize, f64) {
    values
        .iter()
        .copied()
        .enumerate()
        .fold((0, f64::NEG_INFINITY), |best, (i, v)| if v > best.1 { (i, v) } else { best })
}

/// OGAN with a freshly initialized generator and discriminator.
pub fn run_ogan<S: Sut + ?Sized>(
    space: &InputSpace,
    sut: &S,
    spec: &FitnessSpec,
    cfg: &AlgorithmConfig,
    run_seed: u64,
) -> Result<TestSuite> {
    let model = GanModel::init(&mut RunStreams::new(run_seed).net_init);
    run_ogan_with(space, sut, spec, cfg, run_seed, model).map(|(suite, _)| suite)
}

/// OGAN driven by an arbitrary candidate model.
///
/// Each inner iteration proposes one candidate and snaps it to the grid. A
/// snap onto an executed input is a failed trial. Once a single inner loop
/// has seen `dedup_fallback_after` such collisions, colliding proposals are
/// moved to the nearest unexecuted grid point instead, which bounds the loop
/// even when the generator has collapsed onto executed inputs.
pub fn run_ogan_with<S: Sut + ?Sized, M: CandidateModel>(
    space: &InputSpace,
    sut: &S,
    spec: &FitnessSpec,
    cfg: &AlgorithmConfig,
    run_seed: u64,
    mut model: M,
) -> Result<(TestSuite, M)> {
    cfg.validate(space)?;
    let mut streams = RunStreams::new(run_seed);
    let mut session = Session::new(space, sut, spec);
    session.random_fill(cfg.warmup, &mut streams.warmup)?;
    if !session.suite.is_empty() {
        let (x, f) = session.suite.training_data(space)?;
        model.fit(&x, &f, &cfg.gan, &mut streams.shuffling)?;
    }

    while session.suite.len() < cfg.budget {
        let mut target = MovingTarget::new(cfg.treducer);
        let mut collisions = 0;
        let (accepted, prediction) = loop {
            target.decay();
            let proposal = model.propose(&mut streams.gan_latent)?;
            let mut candidate = space.snap(&proposal);
            if session.suite.contains(&candidate) {
                collisions += 1;
                if collisions <= cfg.dedup_fallback_after {
                    continue;
                }
                candidate = space
                    .nearest_excluding(&proposal, session.suite.executed())
                    .ok_or(Error::Exhausted { requested: 1, available: 0 })?;
            }
            let x = normalized_matrix(space, std::iter::once(&candidate))?;
            let p = model.predict(&x)?[0];
            if p >= target.value() {
                break (candidate, p);
            }
        };
        let iterations = target.iterations();
        session.execute(accepted, iterations, iterations, Some((prediction, target.value())))?;
        let (x, f) = session.suite.training_data(space)?;
        model.fit(&x, &f, &cfg.gan, &mut streams.shuffling)?;
    }
    Ok((session.suite, model))
}

/// Dispatch by kind.
pub fn run_algorithm<S: Sut + ?Sized>(
    kind: AlgorithmKind,
    space: &InputSpace,
    sut: &S,
    spec: &FitnessSpec,
    cfg: &AlgorithmConfig,
    run_seed: u64,
) -> Result<TestSuite> {
    match kind {
        AlgorithmKind::Random => run_random(space, sut, spec, cfg, run_seed),
        AlgorithmKind::Dn => run_dn(space, sut, spec, cfg, run_seed),
        AlgorithmKind::Ogan => run_ogan(space, sut, spec, cfg, run_seed),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SuiteStats {
    pub positive_count: usize,
    /// `None` for an empty suite.
    pub mean_fitness: Option<f64>,
    pub fitness_series: Vec<f64>,
}

pub fn suite_stats(suite: &TestSuite, spec: &FitnessSpec) -> SuiteStats {
    let fitness_series: Vec<f64> = suite.records().iter().map(|r| r.fitness).collect();
    let positive_count = suite
        .records()
        .iter()
        .filter(|r| spec.is_positive(r.power))
        .count();
    let mean_fitness = (!fitness_series.is_empty())
        .then(|| fitness_series.iter().sum::<f64>() / fitness_series.len() as f64);
    SuiteStats {
        positive_count,
        mean_fitness,
        fitness_series,
    }
}
