//! Experiment harness: configuration, multi-seed runs, summary statistics
//! and file outputs.

pub mod config;
pub mod experiment;
pub mod output;
pub mod stats;

pub use config::{AlgorithmEntry, ExperimentConfig, FitnessConfig, SutConfig};
pub use experiment::{prepare, run_experiment, run_seed, summarize, AlgorithmSummary, Prepared, RunResult, Summary};
pub use output::emit_outputs;
pub use stats::{histogram, sma};
