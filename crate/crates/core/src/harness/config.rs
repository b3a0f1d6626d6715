//! JSON experiment configuration.

use std::collections::HashSet;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gan::GanHyperparams;
use crate::generators::{AlgorithmConfig, AlgorithmKind};
use crate::space::{Dimension, InputSpace, DIMENSION_NAMES};
use crate::sut::{calibrate_gain, FitnessSpec, SyntheticSut};

/// SUT constants; exactly one of `gain` and `target_density` is set.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SutConfig {
    #[serde(default = "default_p_idle")]
    pub p_idle: f64,
    #[serde(default = "default_kappa_big")]
    pub kappa_big: f64,
    #[serde(default = "default_kappa_little")]
    pub kappa_little: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gain: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub target_density: Option<f64>,
}

fn default_p_idle() -> f64 {
    SyntheticSut::default().p_idle
}

fn default_kappa_big() -> f64 {
    SyntheticSut::default().kappa_big
}

fn default_kappa_little() -> f64 {
    SyntheticSut::default().kappa_little
}

impl Default for SutConfig {
    fn default() -> Self {
        Self {
            p_idle: default_p_idle(),
            kappa_big: default_kappa_big(),
            kappa_little: default_kappa_little(),
            gain: None,
            target_density: Some(0.01),
        }
    }
}

impl SutConfig {
    /// Builds the SUT, calibrating the gain when a target density is given.
    pub fn resolve(&self, space: &InputSpace, spec: &FitnessSpec) -> Result<SyntheticSut> {
        match (self.gain, self.target_density) {
            (Some(gain), None) => SyntheticSut::new(self.p_idle, self.kappa_big, self.kappa_little, gain)
                .map_err(|e| Error::config("sut", e.to_string())),
            (None, Some(density)) => {
                let base = SyntheticSut::new(self.p_idle, self.kappa_big, self.kappa_little, 1.0)
                    .map_err(|e| Error::config("sut", e.to_string()))?;
                calibrate_gain(&base, space, spec, density)
            }
            _ => Err(Error::config(
                "sut",
                "exactly one of `gain` and `target_density` must be given",
            )),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FitnessConfig {
    pub p_m: f64,
}

/// One algorithm variant in the comparison.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AlgorithmEntry {
    pub kind: AlgorithmKind,
    /// Label used in outputs; defaults to `random`, `dn_bs<batchsize>` or `ogan`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub id: Option<String>,
    #[serde(default = "default_budget")]
    pub budget: usize,
    #[serde(default = "default_warmup")]
    pub warmup: usize,
    #[serde(default = "default_treducer")]
    pub treducer: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub batchsize: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gan: Option<GanHyperparams>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dedup_fallback_after: Option<usize>,
}

fn default_budget() -> usize {
    AlgorithmConfig::default().budget
}

fn default_warmup() -> usize {
    AlgorithmConfig::default().warmup
}

fn default_treducer() -> f64 {
    AlgorithmConfig::default().treducer
}

impl AlgorithmEntry {
    pub fn new(kind: AlgorithmKind) -> Self {
        Self {
            kind,
            id: None,
            budget: default_budget(),
            warmup: default_warmup(),
            treducer: default_treducer(),
            batchsize: None,
            gan: None,
            dedup_fallback_after: None,
        }
    }

    pub fn with_batchsize(mut self, batchsize: usize) -> Self {
        self.batchsize = Some(batchsize);
        self
    }

    pub fn label(&self) -> String {
        match (&self.id, self.kind) {
            (Some(id), _) => id.clone(),
            (None, AlgorithmKind::Dn) => format!("dn_bs{}", self.algorithm_config().batchsize),
            (None, kind) => kind.as_str().to_string(),
        }
    }

    pub fn algorithm_config(&self) -> AlgorithmConfig {
        let defaults = AlgorithmConfig::default();
        AlgorithmConfig {
            budget: self.budget,
            warmup: self.warmup,
            treducer: self.treducer,
            batchsize: self.batchsize.unwrap_or(defaults.batchsize),
            gan: self.gan.unwrap_or(defaults.gan),
            dedup_fallback_after: self.dedup_fallback_after.unwrap_or(defaults.dedup_fallback_after),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default = "default_space")]
    pub space: Vec<Dimension>,
    #[serde(default)]
    pub sut: SutConfig,
    #[serde(default = "default_fitness")]
    pub fitness: FitnessConfig,
    pub algorithms: Vec<AlgorithmEntry>,
    #[serde(default = "default_runs")]
    pub runs: usize,
    #[serde(default)]
    pub master_seed: u64,
    #[serde(default = "default_sma_window")]
    pub sma_window: usize,
    #[serde(default = "default_histogram_bins")]
    pub histogram_bins: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output_dir: Option<PathBuf>,
}

fn default_space() -> Vec<Dimension> {
    InputSpace::default_board().dims().to_vec()
}

fn default_fitness() -> FitnessConfig {
    FitnessConfig {
        p_m: FitnessSpec::default().p_m,
    }
}

fn default_runs() -> usize {
    10
}

fn default_sma_window() -> usize {
    10
}

fn default_histogram_bins() -> usize {
    10
}

impl Default for ExperimentConfig {
    /// Random, DN (batch size 4) and OGAN on the default board, 10 runs.
    fn default() -> Self {
        Self {
            space: default_space(),
            sut: SutConfig::default(),
            fitness: default_fitness(),
            algorithms: vec![
                AlgorithmEntry::new(AlgorithmKind::Random),
                AlgorithmEntry::new(AlgorithmKind::Dn).with_batchsize(4),
                AlgorithmEntry::new(AlgorithmKind::Ogan),
            ],
            runs: default_runs(),
            master_seed: 2021,
            sma_window: default_sma_window(),
            histogram_bins: default_histogram_bins(),
            output_dir: None,
        }
    }
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let de = &mut serde_json::Deserializer::from_str(text);
        let cfg: Self = serde_path_to_error::deserialize(de).map_err(|e| {
            let path = e.path().to_string();
            Error::config(if path == "." || path == "?" { "<root>".into() } else { path }, e.into_inner().to_string())
        })?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_json(&text)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    pub fn input_space(&self) -> Result<InputSpace> {
        for (i, (dim, expected)) in self.space.iter().zip(DIMENSION_NAMES).enumerate() {
            if dim.name != expected {
                return Err(Error::config(
                    format!("space[{i}].name"),
                    format!("expected `{expected}`, got `{}`", dim.name),
                ));
            }
        }
        InputSpace::new(self.space.clone()).map_err(|e| Error::config("space", e.to_string()))
    }

    pub fn fitness_spec(&self) -> Result<FitnessSpec> {
        FitnessSpec::new(self.fitness.p_m).map_err(|e| Error::config("fitness.p_m", e.to_string()))
    }

    /// Checks everything that does not need the (possibly expensive) SUT
    /// calibration.
    pub fn validate(&self) -> Result<()> {
        let space = self.input_space()?;
        self.fitness_spec()?;
        match (self.sut.gain, self.sut.target_density) {
            (Some(_), None) | (None, Some(_)) => {}
            _ => {
                return Err(Error::config(
                    "sut",
                    "exactly one of `gain` and `target_density` must be given",
                ))
            }
        }
        if let Some(d) = self.sut.target_density {
            if !(d > 0.0 && d < 1.0) {
                return Err(Error::config("sut.target_density", "must lie in (0, 1)"));
            }
        }
        if self.algorithms.is_empty() {
            return Err(Error::config("algorithms", "at least one algorithm is required"));
        }
        if self.runs == 0 {
            return Err(Error::config("runs", "must be at least 1"));
        }
        if self.histogram_bins == 0 {
            return Err(Error::config("histogram_bins", "must be at least 1"));
        }
        let mut labels = HashSet::new();
        for (i, entry) in self.algorithms.iter().enumerate() {
            let cfg = entry.algorithm_config();
            cfg.validate(&space)
                .map_err(|e| Error::config(format!("algorithms[{i}]"), e.to_string()))?;
            if self.sma_window == 0 || self.sma_window > cfg.budget {
                return Err(Error::config(
                    "sma_window",
                    format!("must lie in 1..={} (budget of algorithms[{i}])", cfg.budget),
                ));
            }
            if !labels.insert(entry.label()) {
                return Err(Error::config(
                    format!("algorithms[{i}].id"),
                    format!("duplicate algorithm label `{}`", entry.label()),
                ));
            }
        }
        Ok(())
    }
}
