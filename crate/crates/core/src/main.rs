use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Parser, Subcommand};

use perfgan::generators::{run_algorithm, AlgorithmKind};
use perfgan::harness::{
    emit_outputs, prepare, run_experiment, summarize, AlgorithmEntry, ExperimentConfig, RunResult, Summary,
};
use perfgan::Error;

#[derive(Parser)]
#[command(name = "perfgan", version, about = "Online GAN performance test generation")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run every configured algorithm over several seeds and summarize.
    Compare {
        /// JSON experiment config; built-in defaults when omitted.
        #[arg(long)]
        config: Option<PathBuf>,
        /// Output directory (overrides `output_dir` in the config).
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        runs: Option<usize>,
        #[arg(long)]
        master_seed: Option<u64>,
    },
    /// Run a single algorithm once with an explicit seed.
    Run {
        #[arg(long)]
        algorithm: AlgorithmKind,
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Exhaustively evaluate the space and report the positive set.
    Oracle {
        #[arg(long)]
        config: Option<PathBuf>,
    },
}

fn load(path: Option<&Path>) -> perfgan::Result<ExperimentConfig> {
    match path {
        Some(p) => ExperimentConfig::load(p),
        None => Ok(ExperimentConfig::default()),
    }
}

fn print_summary(summary: &Summary) {
    println!(
        "space: {} inputs, {} positive (density {:.4}%), gain {}",
        summary.oracle.cardinality,
        summary.oracle.positive_count,
        summary.oracle.density * 100.0,
        summary.sut.gain
    );
    println!(
        "{:<12} {:>6} {:>18} {:>13} {:>11} {:>11}",
        "algorithm", "runs", "positives", "mean_fitness", "iterations", "trials"
    );
    let opt = |v: Option<f64>| v.map_or_else(|| "-".to_string(), |v| format!("{v:.2}"));
    for a in &summary.algorithms {
        println!(
            "{:<12} {:>6} {:>18} {:>13} {:>11} {:>11}",
            a.id,
            a.runs,
            format!("{:.1} ± {:.1}", a.positive_count_mean, a.positive_count_stddev),
            opt(a.mean_fitness),
            opt(a.mean_iterations_per_accepted),
            opt(a.mean_trials_per_accepted),
        );
    }
}

fn compare(
    config: Option<PathBuf>,
    out: Option<PathBuf>,
    runs: Option<usize>,
    master_seed: Option<u64>,
) -> perfgan::Result<()> {
    let mut cfg = load(config.as_deref())?;
    if let Some(runs) = runs {
        cfg.runs = runs;
    }
    if let Some(seed) = master_seed {
        cfg.master_seed = seed;
    }
    let dir = out
        .or_else(|| cfg.output_dir.clone())
        .unwrap_or_else(|| PathBuf::from("results"));
    cfg.validate()?;
    let start = Instant::now();
    let (results, summary) = run_experiment(&cfg)?;
    let space = cfg.input_space()?;
    let files = emit_outputs(&dir, &space, &results, &summary, &cfg)?;
    print_summary(&summary);
    eprintln!("finished {} runs in {:.1?}", results.len(), start.elapsed());
    for f in files {
        eprintln!("wrote {}", f.display());
    }
    Ok(())
}

fn run_single(kind: AlgorithmKind, config: Option<PathBuf>, seed: u64, out: PathBuf) -> perfgan::Result<()> {
    let base = load(config.as_deref())?;
    let entry = base
        .algorithms
        .iter()
        .find(|a| a.kind == kind)
        .cloned()
        .unwrap_or_else(|| AlgorithmEntry::new(kind));
    let cfg = ExperimentConfig {
        algorithms: vec![entry.clone()],
        runs: 1,
        master_seed: seed,
        ..base
    };
    let prepared = prepare(&cfg)?;
    let start = Instant::now();
    let algo_cfg = entry.algorithm_config();
    let suite = run_algorithm(kind, &prepared.space, &prepared.sut, &prepared.spec, &algo_cfg, seed)?;
    let results = vec![RunResult {
        algorithm: entry.label(),
        kind,
        run_index: 0,
        seed,
        warmup: algo_cfg.warmup,
        suite,
        duration: start.elapsed(),
    }];
    let summary = summarize(&cfg, &prepared, &results)?;
    let files = emit_outputs(&out, &prepared.space, &results, &summary, &cfg)?;
    print_summary(&summary);
    for f in files {
        eprintln!("wrote {}", f.display());
    }
    Ok(())
}

fn oracle(config: Option<PathBuf>) -> perfgan::Result<()> {
    let cfg = load(config.as_deref())?;
    let start = Instant::now();
    let prepared = prepare(&cfg)?;
    let o = &prepared.oracle;
    println!("cardinality: {}", o.cardinality);
    println!("positives: {}", o.positive_count);
    println!("density: {}", o.density);
    println!("max_power_w: {}", o.max_power);
    println!("gain: {}", prepared.sut.gain);
    eprintln!("oracle finished in {:.1?}", start.elapsed());
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let result = match cli.command {
        Command::Compare {
            config,
            out,
            runs,
            master_seed,
        } => compare(config, out, runs, master_seed),
        Command::Run {
            algorithm,
            config,
            seed,
            out,
        } => run_single(algorithm, config, seed, out),
        Command::Oracle { config } => oracle(config),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            match e {
                Error::Io { .. } => ExitCode::from(2),
                _ => ExitCode::from(1),
            }
        }
    }
}
