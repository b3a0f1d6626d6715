//! Multi-seed comparison runs.

use std::time::{Duration, Instant};

use rayon::prelude::*;
use serde::Serialize;

use super::config::ExperimentConfig;
use super::stats::{histogram, mean, sma, stddev};
use crate::error::Result;
use crate::generators::{run_algorithm, suite_stats, AlgorithmKind, TestSuite};
use crate::rng::derive_seed;
use crate::space::InputSpace;
use crate::sut::{oracle_report, FitnessSpec, OracleReport, SyntheticSut};

/// Seed of run `run_index`.
///
/// Depends only on the master seed and the run index: every algorithm sees
/// the same seed for a given run, so their warm-up prefixes coincide and the
/// comparison is paired.
pub fn run_seed(master_seed: u64, run_index: usize) -> u64 {
    derive_seed(master_seed, "run", run_index as u64)
}

#[derive(Debug, Clone)]
pub struct RunResult {
    pub algorithm: String,
    pub kind: AlgorithmKind,
    pub run_index: usize,
    pub seed: u64,
    pub warmup: usize,
    pub suite: TestSuite,
    pub duration: Duration,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AlgorithmSummary {
    pub id: String,
    pub kind: AlgorithmKind,
    pub runs: usize,
    pub budget: usize,
    pub warmup: usize,
    pub positive_counts: Vec<usize>,
    pub positive_count_mean: f64,
    pub positive_count_stddev: f64,
    pub mean_fitness: Option<f64>,
    /// Averages over post-warm-up tests of all runs.
    pub mean_iterations_per_accepted: Option<f64>,
    pub mean_trials_per_accepted: Option<f64>,
    pub histogram: Vec<usize>,
    /// Per-index fitness averaged across runs.
    pub mean_fitness_by_index: Vec<f64>,
    pub sma: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Summary {
    pub oracle: OracleReport,
    pub sut: SyntheticSut,
    pub sma_window: usize,
    pub histogram_bins: usize,
    pub algorithms: Vec<AlgorithmSummary>,
}

impl Summary {
    pub fn algorithm(&self, id: &str) -> Option<&AlgorithmSummary> {
        self.algorithms.iter().find(|a| a.id == id)
    }
}

/// The resolved, ready-to-run pieces of a config.
pub struct Prepared {
    pub space: InputSpace,
    pub spec: FitnessSpec,
    pub sut: SyntheticSut,
    pub oracle: OracleReport,
}

pub fn prepare(cfg: &ExperimentConfig) -> Result<Prepared> {
    cfg.validate()?;
    let space = cfg.input_space()?;
    let spec = cfg.fitness_spec()?;
    let sut = cfg.sut.resolve(&space, &spec)?;
    let oracle = oracle_report(&sut, &space, &spec)?;
    Ok(Prepared {
        space,
        spec,
        sut,
        oracle,
    })
}

/// Runs every algorithm `cfg.runs` times (in parallel) and summarizes.
/// Results are ordered by algorithm (config order), then run index.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<(Vec<RunResult>, Summary)> {
    let prepared = prepare(cfg)?;
    let Prepared {
        space, spec, sut, ..
    } = &prepared;
    let jobs: Vec<(usize, usize)> = (0..cfg.algorithms.len())
        .flat_map(|a| (0..cfg.runs).map(move |r| (a, r)))
        .collect();
    let results = jobs
        .par_iter()
        .map(|&(a, r)| {
            let entry = &cfg.algorithms[a];
            let algo_cfg = entry.algorithm_config();
            let seed = run_seed(cfg.master_seed, r);
            let start = Instant::now();
            let suite = run_algorithm(entry.kind, space, sut, spec, &algo_cfg, seed)?;
            Ok(RunResult {
                algorithm: entry.label(),
                kind: entry.kind,
                run_index: r,
                seed,
                warmup: algo_cfg.warmup,
                suite,
                duration: start.elapsed(),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let summary = summarize(cfg, &prepared, &results)?;
    Ok((results, summary))
}

pub fn summarize(cfg: &ExperimentConfig, prepared: &Prepared, results: &[RunResult]) -> Result<Summary> {
    let mut algorithms = Vec::with_capacity(cfg.algorithms.len());
    for entry in &cfg.algorithms {
        let id = entry.label();
        let algo_cfg = entry.algorithm_config();
        let runs: Vec<&RunResult> = results.iter().filter(|r| r.algorithm == id).collect();

        let stats: Vec<_> = runs.iter().map(|r| suite_stats(&r.suite, &prepared.spec)).collect();
        let positive_counts: Vec<usize> = stats.iter().map(|s| s.positive_count).collect();
        let counts_f: Vec<f64> = positive_counts.iter().map(|&c| c as f64).collect();
        let all_fitness: Vec<f64> = stats.iter().flat_map(|s| s.fitness_series.iter().copied()).collect();

        let post_warmup: Vec<_> = runs
            .iter()
            .flat_map(|r| r.suite.records().iter().skip(r.warmup))
            .collect();
        let iterations: Vec<f64> = post_warmup.iter().map(|r| r.inner_iterations as f64).collect();
        let trials: Vec<f64> = post_warmup.iter().map(|r| r.candidate_trials as f64).collect();

        let budget = algo_cfg.budget;
        let mean_fitness_by_index: Vec<f64> = (0..budget)
            .map(|i| {
                let column: Vec<f64> = stats.iter().map(|s| s.fitness_series[i]).collect();
                mean(&column).unwrap_or(0.0)
            })
            .collect();

        algorithms.push(AlgorithmSummary {
            id,
            kind: entry.kind,
            runs: runs.len(),
            budget,
            warmup: algo_cfg.warmup,
            positive_count_mean: mean(&counts_f).unwrap_or(0.0),
            positive_count_stddev: stddev(&counts_f),
            positive_counts,
            mean_fitness: mean(&all_fitness),
            mean_iterations_per_accepted: mean(&iterations),
            mean_trials_per_accepted: mean(&trials),
            histogram: histogram(&all_fitness, cfg.histogram_bins)?,
            sma: sma(&mean_fitness_by_index, cfg.sma_window)?,
            mean_fitness_by_index,
        });
    }
    Ok(Summary {
        oracle: prepared.oracle.clone(),
        sut: prepared.sut,
        sma_window: cfg.sma_window,
        histogram_bins: cfg.histogram_bins,
        algorithms,
    })
}
