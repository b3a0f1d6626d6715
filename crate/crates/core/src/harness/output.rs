//! CSV / JSON writers. All files are UTF-8 with LF line endings and rows in
//! a fixed order, so identical inputs give byte-identical files.

use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;

use super::config::ExperimentConfig;
use super::experiment::{RunResult, Summary};
use crate::error::{Error, Result};
use crate::space::InputSpace;

pub const TESTS_FILE: &str = "tests.csv";
pub const SUMMARY_FILE: &str = "summary.json";
pub const HISTOGRAM_FILE: &str = "histogram.csv";
pub const SMA_FILE: &str = "sma.csv";

pub const TESTS_HEADER: [&str; 14] = [
    "run_id",
    "algorithm",
    "seed",
    "test_index",
    "big_cpus",
    "big_freq",
    "big_util",
    "little_cpus",
    "little_freq",
    "little_util",
    "power_w",
    "fitness",
    "inner_iterations",
    "candidate_trials",
];

#[derive(Serialize)]
struct SummaryDocument<'a> {
    #[serde(flatten)]
    summary: &'a Summary,
    config: &'a ExperimentConfig,
}

fn csv_writer(path: &Path) -> Result<csv::Writer<fs::File>> {
    let file = fs::File::create(path).map_err(|e| Error::io(path, e))?;
    Ok(csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(file))
}

fn csv_error(path: &Path, e: csv::Error) -> Error {
    let kind = match e.kind() {
        csv::ErrorKind::Io(io) => io.kind(),
        _ => std::io::ErrorKind::Other,
    };
    Error::io(path, std::io::Error::new(kind, e.to_string()))
}

/// Per-test rows, one per executed test of every run.
pub fn write_tests_csv(path: &Path, space: &InputSpace, results: &[RunResult]) -> Result<()> {
    let mut w = csv_writer(path)?;
    w.write_record(TESTS_HEADER).map_err(|e| csv_error(path, e))?;
    for run in results {
        for r in run.suite.records() {
            let values = space.values(&r.input)?;
            let mut row = vec![
                run.run_index.to_string(),
                run.algorithm.clone(),
                run.seed.to_string(),
                r.test_index.to_string(),
            ];
            row.extend(values.iter().map(f64::to_string));
            row.extend([
                r.power.to_string(),
                r.fitness.to_string(),
                r.inner_iterations.to_string(),
                r.candidate_trials.to_string(),
            ]);
            w.write_record(&row).map_err(|e| csv_error(path, e))?;
        }
    }
    w.flush().map_err(|e| Error::io(path, e))
}

pub fn summary_json(summary: &Summary, cfg: &ExperimentConfig) -> String {
    let mut text = serde_json::to_string_pretty(&SummaryDocument { summary, config: cfg })
        .expect("summary serializes");
    text.push('\n');
    text
}

pub fn write_histogram_csv(path: &Path, summary: &Summary) -> Result<()> {
    let mut w = csv_writer(path)?;
    w.write_record(["algorithm", "bin", "lower", "upper", "count"])
        .map_err(|e| csv_error(path, e))?;
    let bins = summary.histogram_bins;
    for a in &summary.algorithms {
        for (i, count) in a.histogram.iter().enumerate() {
            let lower = i as f64 / bins as f64;
            let upper = (i + 1) as f64 / bins as f64;
            w.write_record([
                a.id.clone(),
                i.to_string(),
                lower.to_string(),
                upper.to_string(),
                count.to_string(),
            ])
            .map_err(|e| csv_error(path, e))?;
        }
    }
    w.flush().map_err(|e| Error::io(path, e))
}

/// `test_index` is the last test covered by each averaging window.
pub fn write_sma_csv(path: &Path, summary: &Summary) -> Result<()> {
    let mut w = csv_writer(path)?;
    w.write_record(["algorithm", "test_index", "mean_fitness", "sma"])
        .map_err(|e| csv_error(path, e))?;
    for a in &summary.algorithms {
        for (j, v) in a.sma.iter().enumerate() {
            let idx = j + summary.sma_window - 1;
            w.write_record([
                a.id.clone(),
                idx.to_string(),
                a.mean_fitness_by_index[idx].to_string(),
                v.to_string(),
            ])
            .map_err(|e| csv_error(path, e))?;
        }
    }
    w.flush().map_err(|e| Error::io(path, e))
}

/// Writes every output file into `dir`, creating it if needed.
pub fn emit_outputs(
    dir: &Path,
    space: &InputSpace,
    results: &[RunResult],
    summary: &Summary,
    cfg: &ExperimentConfig,
) -> Result<Vec<PathBuf>> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let tests = dir.join(TESTS_FILE);
    write_tests_csv(&tests, space, results)?;
    let json = dir.join(SUMMARY_FILE);
    fs::write(&json, summary_json(summary, cfg)).map_err(|e| Error::io(&json, e))?;
    let hist = dir.join(HISTOGRAM_FILE);
    write_histogram_csv(&hist, summary)?;
    let sma = dir.join(SMA_FILE);
    write_sma_csv(&sma, summary)?;
    Ok(vec![tests, json, hist, sma])
}
