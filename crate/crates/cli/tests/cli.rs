//! End-to-end checks through the compiled binary.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use brook_core::data::{generate_synthetic, load_sparse, SyntheticSpec};
use brook_core::eval::{prequential_run, validation_prefix, EvalWeights};
use brook_core::types::Hyperparams;
use brook_core::{BinaryAlgorithm, BinaryLearner};

fn brook() -> Command {
    Command::new(env!("CARGO_BIN_EXE_brook"))
}

fn run_ok(cmd: &mut Command) -> Output {
    let out = cmd.output().expect("spawning the binary");
    assert!(
        out.status.success(),
        "command failed\nstdout: {}\nstderr: {}",
        String::from_utf8_lossy(&out.stdout),
        String::from_utf8_lossy(&out.stderr)
    );
    out
}

fn binary_spec() -> SyntheticSpec {
    SyntheticSpec {
        classes: 2,
        dim: 5,
        samples: 300,
        priors: vec![0.25, 0.75],
        means: None,
        noise: 1.0,
        flip: 0.05,
        seed: 21,
    }
}

fn write_spec(dir: &Path, spec: &SyntheticSpec) -> PathBuf {
    let path = dir.join("spec.json");
    fs::write(&path, serde_json::to_string(spec).unwrap()).unwrap();
    path
}

fn summary(path: &Path) -> serde_json::Value {
    serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap()
}

#[test]
fn rerunning_with_the_same_seed_reproduces_the_artifacts_byte_for_byte() {
    let dir = tempfile::tempdir().unwrap();
    let spec = write_spec(dir.path(), &binary_spec());
    for out in ["a", "b"] {
        run_ok(
            brook()
                .args(["run", "--algo", "arow", "--synth"])
                .arg(&spec)
                .args(["--seed", "17", "--stride", "50", "--out-dir"])
                .arg(dir.path().join(out)),
        );
    }
    let read = |name: &str, file: &str| fs::read(dir.path().join(name).join(file)).unwrap();
    assert_eq!(read("a", "summary.json"), read("b", "summary.json"));
    assert_eq!(read("a", "curve.csv"), read("b", "curve.csv"));
}

#[test]
fn summary_aggregate_matches_the_last_curve_row() {
    let dir = tempfile::tempdir().unwrap();
    let spec = write_spec(dir.path(), &binary_spec());
    run_ok(
        brook()
            .args(["run", "--algo", "pa1", "--synth"])
            .arg(&spec)
            .args(["--seed", "2", "--stride", "64", "--out-dir"])
            .arg(dir.path().join("out")),
    );
    let doc = summary(&dir.path().join("out").join("summary.json"));
    let report = &doc["report"];
    let last = report["curve"].as_array().unwrap().last().unwrap().clone();

    // The curve is the trial-averaged one, so its last row is the mean of
    // the per-trial finals.
    let approx = |a: f64, b: f64| (a - b).abs() < 1e-12;
    assert!(approx(
        last["error_rate"].as_f64().unwrap(),
        report["aggregate"]["error_rate"]["mean"].as_f64().unwrap()
    ));
    assert!(approx(
        last["weighted"].as_f64().unwrap(),
        report["aggregate"]["weighted"]["mean"].as_f64().unwrap()
    ));

    // And the CSV mirrors the same snapshots.
    let curve = fs::read_to_string(dir.path().join("out").join("curve.csv")).unwrap();
    let last_line = curve.lines().last().unwrap();
    let cells: Vec<&str> = last_line.split(',').collect();
    assert_eq!(
        cells[0].parse::<u64>().unwrap(),
        last["round"].as_u64().unwrap()
    );
    assert!(approx(
        cells[1].parse().unwrap(),
        last["error_rate"].as_f64().unwrap()
    ));
    assert!(approx(
        cells[4].parse().unwrap(),
        last["weighted"].as_f64().unwrap()
    ));
}

#[test]
fn bench_with_one_algorithm_equals_the_run_summary() {
    let dir = tempfile::tempdir().unwrap();
    let spec = write_spec(dir.path(), &binary_spec());
    run_ok(
        brook()
            .args(["run", "--algo", "ogd", "--synth"])
            .arg(&spec)
            .args(["--seed", "5", "--out-dir"])
            .arg(dir.path().join("run")),
    );
    run_ok(
        brook()
            .args(["bench", "--algo", "ogd", "--synth"])
            .arg(&spec)
            .args(["--seed", "5", "--out-dir"])
            .arg(dir.path().join("bench")),
    );
    let from_run = summary(&dir.path().join("run").join("summary.json"));
    let from_bench = summary(&dir.path().join("bench").join("summary-ogd.json"));
    assert_eq!(from_run["report"], from_bench["report"]);
}

#[test]
fn bench_rows_consume_identical_streams_and_record_failures() {
    let dir = tempfile::tempdir().unwrap();
    let spec = write_spec(dir.path(), &binary_spec());
    run_ok(
        brook()
            .args(["bench", "--algo", "perceptron,csogd", "--synth"])
            .arg(&spec)
            .args(["--seed", "9", "--out-dir"])
            .arg(dir.path().join("bench")),
    );
    let table = fs::read_to_string(dir.path().join("bench").join("bench.csv")).unwrap();
    let rows: Vec<&str> = table.lines().skip(2).collect();
    assert_eq!(rows.len(), 2);
    let checksum = |row: &str| row.rsplit(',').next().unwrap().to_string();
    assert_eq!(checksum(rows[0]), checksum(rows[1]));
    assert!(!checksum(rows[0]).is_empty());

    // A bad hyperparameter sinks one algorithm but not the comparison.
    let out = run_ok(
        brook()
            .args(["bench", "--algo", "perceptron,scw", "--synth"])
            .arg(&spec)
            .args(["--confidence", "0.4", "--seed", "9", "--out-dir"])
            .arg(dir.path().join("mixed")),
    );
    assert!(String::from_utf8_lossy(&out.stdout).contains("failed"));
    let table = fs::read_to_string(dir.path().join("mixed").join("bench.csv")).unwrap();
    assert!(table.contains("scw,\"failed:"));
    assert!(table.contains("perceptron,ok"));
}

#[test]
fn tune_is_deterministic_and_its_scores_rerun_to_the_same_values() {
    let dir = tempfile::tempdir().unwrap();
    let spec_value = binary_spec();
    let spec = write_spec(dir.path(), &spec_value);
    for out in ["t1", "t2"] {
        run_ok(
            brook()
                .args(["tune", "--algo", "pa1", "--grid", "0.1,1,10", "--synth"])
                .arg(&spec)
                .args(["--seed", "3", "--out-dir"])
                .arg(dir.path().join(out)),
        );
    }
    assert_eq!(
        fs::read(dir.path().join("t1").join("tune.json")).unwrap(),
        fs::read(dir.path().join("t2").join("tune.json")).unwrap()
    );

    let doc = summary(&dir.path().join("t1").join("tune.json"));
    let points = doc["report"]["points"].as_array().unwrap();
    assert_eq!(points.len(), 3);

    // Replay each grid point through the library; the recorded scores must
    // come back exactly.
    let dataset = generate_synthetic(&spec_value).unwrap();
    let prefix = validation_prefix(dataset.len(), 0.2).unwrap();
    for point in points {
        let value = point["value"].as_f64().unwrap();
        let params = BinaryAlgorithm::PaI
            .apply_grid_value(&Hyperparams::default(), value)
            .unwrap();
        let mut learner = BinaryLearner::new(BinaryAlgorithm::PaI, 5, params).unwrap();
        let record = prequential_run(
            &mut learner,
            prefix.iter().map(|&i| &dataset.examples()[i]),
            prefix.len(),
            &EvalWeights::balanced(),
        )
        .unwrap();
        assert_eq!(
            record.final_snapshot.error_rate,
            point["score"].as_f64().unwrap()
        );
    }
}

#[test]
fn gen_writes_a_file_that_reloads_to_the_generated_dataset() {
    let dir = tempfile::tempdir().unwrap();
    let spec_value = SyntheticSpec {
        classes: 3,
        dim: 4,
        samples: 120,
        priors: vec![0.5, 0.3, 0.2],
        means: None,
        noise: 0.8,
        flip: 0.0,
        seed: 33,
    };
    let spec = write_spec(dir.path(), &spec_value);
    let out = dir.path().join("stream.txt");
    run_ok(brook().args(["gen", "--synth"]).arg(&spec).arg("--out").arg(&out));

    let reloaded = load_sparse(&out, Some(4)).unwrap();
    let direct = generate_synthetic(&spec_value).unwrap();
    assert_eq!(reloaded.examples(), direct.examples());
    assert_eq!(reloaded.meta().class_counts, direct.meta().class_counts);
}

#[test]
fn the_seed_flag_beats_the_environment_override() {
    let dir = tempfile::tempdir().unwrap();
    let spec = write_spec(dir.path(), &binary_spec());
    run_ok(
        brook()
            .env("BROOK_SEED", "99")
            .args(["run", "--algo", "pa1", "--synth"])
            .arg(&spec)
            .args(["--out-dir"])
            .arg(dir.path().join("env")),
    );
    run_ok(
        brook()
            .env("BROOK_SEED", "99")
            .args(["run", "--algo", "pa1", "--synth"])
            .arg(&spec)
            .args(["--seed", "5", "--out-dir"])
            .arg(dir.path().join("flag")),
    );
    let env_seed = summary(&dir.path().join("env").join("summary.json"));
    let flag_seed = summary(&dir.path().join("flag").join("summary.json"));
    assert_eq!(env_seed["config"]["master_seed"], 99);
    assert_eq!(flag_seed["config"]["master_seed"], 5);
}

#[test]
fn failures_exit_nonzero_with_a_diagnostic_on_stderr() {
    let out = brook()
        .args(["run", "--algo", "pa1"])
        .output()
        .expect("spawning the binary");
    assert!(!out.status.success());
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(stderr.contains("no stream source"), "stderr: {stderr}");

    let dir = tempfile::tempdir().unwrap();
    let spec = write_spec(dir.path(), &binary_spec());
    let out = brook()
        .args(["run", "--algo", "romma", "--task", "multiclass", "--synth"])
        .arg(&spec)
        .output()
        .expect("spawning the binary");
    assert!(!out.status.success());
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(stderr.contains("does not match"), "stderr: {stderr}");
}
