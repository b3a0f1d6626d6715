use std::path::Path;
use std::process::{Command, Output};

use perfgan::generators::AlgorithmKind;
use perfgan::harness::{emit_outputs, prepare, run_experiment, AlgorithmEntry, ExperimentConfig};

fn perfgan(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_perfgan")).args(args).output().unwrap()
}

fn small_config(budget: usize, warmup: usize) -> ExperimentConfig {
    ExperimentConfig {
        runs: 2,
        sma_window: 5,
        algorithms: [
            AlgorithmEntry::new(AlgorithmKind::Random),
            AlgorithmEntry::new(AlgorithmKind::Dn).with_batchsize(4),
            AlgorithmEntry::new(AlgorithmKind::Ogan),
        ]
        .into_iter()
        .map(|mut a| {
            a.budget = budget;
            a.warmup = warmup;
            a
        })
        .collect(),
        ..ExperimentConfig::default()
    }
}

fn write_config(dir: &Path, cfg: &ExperimentConfig) -> String {
    let path = dir.join("config.json");
    std::fs::write(&path, cfg.to_json()).unwrap();
    path.to_string_lossy().into_owned()
}

#[test]
fn help_and_version_exit_zero() {
    for flag in ["--help", "--version"] {
        let out = perfgan(&[flag]);
        assert!(out.status.success(), "{flag}");
        assert!(!out.stdout.is_empty());
    }
}

#[test]
fn usage_and_config_errors_exit_one() {
    assert_eq!(perfgan(&["frobnicate"]).status.code(), Some(1));
    assert_eq!(perfgan(&["run", "--algorithm", "ogan"]).status.code(), Some(1));

    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.json");
    std::fs::write(&bad, r#"{"algorithms": [{"kind": "annealing"}]}"#).unwrap();
    let out = perfgan(&["oracle", "--config", bad.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("algorithms[0].kind"));
}

#[test]
fn missing_config_file_exits_two() {
    let out = perfgan(&["oracle", "--config", "/nonexistent/perfgan.json"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn oracle_reports_default_calibration() {
    let out = perfgan(&["oracle"]);
    assert!(out.status.success());
    let text = String::from_utf8_lossy(&out.stdout);
    assert!(text.contains("665000"), "{text}");
    assert!(text.contains("6757"), "{text}");
}

#[test]
fn compare_writes_consistent_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = small_config(56, 50);
    let config = write_config(dir.path(), &cfg);
    let out_dir = dir.path().join("out");
    let out = perfgan(&["compare", "--config", &config, "--out", out_dir.to_str().unwrap()]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));

    let tests = std::fs::read_to_string(out_dir.join("tests.csv")).unwrap();
    let lines: Vec<&str> = tests.lines().collect();
    assert_eq!(lines.len(), cfg.runs * cfg.algorithms.len() * 56 + 1);
    assert!(lines[0].starts_with("run_id,algorithm,seed,test_index,big_cpus"));
    assert!(!tests.contains('\r'));

    let summary: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(out_dir.join("summary.json")).unwrap()).unwrap();
    let algorithms = summary["algorithms"].as_array().unwrap();
    assert_eq!(algorithms.len(), 3);
    assert_eq!(summary["oracle"]["positive_count"], 6757);
    for a in algorithms {
        assert_eq!(a["positive_counts"].as_array().unwrap().len(), 2);
    }

    let hist = std::fs::read_to_string(out_dir.join("histogram.csv")).unwrap();
    assert_eq!(hist.lines().count(), 3 * cfg.histogram_bins + 1);
    let sma = std::fs::read_to_string(out_dir.join("sma.csv")).unwrap();
    assert_eq!(sma.lines().count(), 3 * (56 - cfg.sma_window + 1) + 1);
}

#[test]
fn run_subcommand_writes_single_suite() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(dir.path(), &small_config(53, 50));
    let out_dir = dir.path().join("single");
    let out = perfgan(&[
        "run", "--algorithm", "dn", "--config", &config, "--seed", "9", "--out", out_dir.to_str().unwrap(),
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let tests = std::fs::read_to_string(out_dir.join("tests.csv")).unwrap();
    assert_eq!(tests.lines().count(), 54);
    assert!(tests.lines().skip(1).all(|l| l.contains(",dn_bs4,9,")));
}

#[test]
fn budget_equal_to_warmup_gives_identical_suites() {
    let mut cfg = small_config(30, 30);
    cfg.runs = 1;
    let (results, summary) = run_experiment(&cfg).unwrap();
    assert_eq!(results.len(), 3);
    assert!(results.iter().all(|r| r.suite.records() == results[0].suite.records()));
    let counts: Vec<_> = summary.algorithms.iter().map(|a| a.positive_counts.clone()).collect();
    assert!(counts.iter().all(|c| c == &counts[0]));
}

#[test]
fn emitted_outputs_are_deterministic() {
    let cfg = small_config(54, 50);
    let prepared = prepare(&cfg).unwrap();
    let dirs = [tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap()];
    for d in &dirs {
        let (results, summary) = run_experiment(&cfg).unwrap();
        emit_outputs(d.path(), &prepared.space, &results, &summary, &cfg).unwrap();
    }
    for name in ["tests.csv", "summary.json", "histogram.csv", "sma.csv"] {
        let a = std::fs::read(dirs[0].path().join(name)).unwrap();
        let b = std::fs::read(dirs[1].path().join(name)).unwrap();
        assert_eq!(a, b, "{name}");
    }
}

#[test]
fn shipped_configs_parse_and_validate() {
    let root = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs");
    for name in ["default.json", "four_variants.json"] {
        let cfg = ExperimentConfig::load(&root.join(name)).unwrap();
        cfg.validate().unwrap();
    }
    let shipped = ExperimentConfig::load(&root.join("default.json")).unwrap();
    let builtin = ExperimentConfig::default();
    assert_eq!(shipped.space, builtin.space);
    assert_eq!(shipped.sut, builtin.sut);
    assert_eq!((shipped.runs, shipped.master_seed), (builtin.runs, builtin.master_seed));
    let resolved = |c: &ExperimentConfig| -> Vec<_> {
        c.algorithms.iter().map(|a| (a.label(), a.algorithm_config())).collect()
    };
    assert_eq!(resolved(&shipped), resolved(&builtin));
}
