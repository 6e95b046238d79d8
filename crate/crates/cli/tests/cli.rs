use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

const SMALL: &str = r#"
n_gates = 4
n_error_matrices = 12
shots = 2000
seed = 5

[noise]
lambda1 = 0.05
lambda2 = 0.05

[twin]
n_twins = 4

[twin.vae]
hidden = [8, 6]

[twin.training]
epochs = 3
batch_size = 4

[benchmark]
lambda_tot = [0.0, 0.05]
anomaly_p = [0.0, 0.1]
biased_axis = [0.0, 0.1]
w1_runs = 4
"#;

fn qpt(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qpt")).args(args).output().expect("binary runs")
}

fn ok_json(out: Output) -> Value {
    assert!(out.status.success(), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).expect("stdout is JSON")
}

fn err_json(out: &Output) -> Value {
    assert!(!out.status.success());
    serde_json::from_slice(&out.stderr).expect("stderr is JSON")
}

fn setup(dir: &Path) -> String {
    let cfg = dir.join("run.toml");
    std::fs::write(&cfg, SMALL).unwrap();
    cfg.display().to_string()
}

#[test]
fn full_pipeline() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = setup(tmp.path());
    let out = tmp.path().join("out");
    let out_s = out.display().to_string();
    let common = ["--config", cfg.as_str(), "--out", out_s.as_str()];

    let sim = ok_json(qpt(&[&common[..], &["simulate"]].concat()));
    assert_eq!(sim["files"], 16);
    assert!(out.join("manifest.json").is_file() && out.join("config.toml").is_file());

    let train = ok_json(qpt(&[&common[..], &["train-twin"]].concat()));
    assert_eq!(train["epochs"], 3);
    assert!(out.join("twin/model.json").is_file() && out.join("twin/history.svg").is_file());

    let rec = ok_json(qpt(&[&common[..], &["--method", "std,em,ml", "reconstruct"]].concat()));
    let methods: Vec<&str> = rec["summaries"].as_array().unwrap().iter().map(|s| s["method"].as_str().unwrap()).collect();
    assert_eq!(methods, ["std", "em", "ml"]);
    let table = std::fs::read_to_string(out.join("results/fidelities.csv")).unwrap();
    assert!(table.starts_with("method,gate_label,fidelity,q\n"));

    let twins = ok_json(qpt(&[&common[..], &["sample-twin", "--count", "3"]].concat()));
    assert_eq!(twins["count"], 3);
    assert!(out.join("twins/0002.json").is_file());

    let metrics_out = tmp.path().join("metrics").display().to_string();
    let input = out.join("results/fidelities.csv").display().to_string();
    let m = ok_json(qpt(&["--out", &metrics_out, "metrics", "--input", &input]));
    assert_eq!(m["w1"].as_array().unwrap().len(), 3);
    assert!(tmp.path().join("metrics/metrics.csv").is_file());
}

#[test]
fn saved_config_is_reused() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = setup(tmp.path());
    let out = tmp.path().join("out").display().to_string();
    ok_json(qpt(&["--config", &cfg, "--out", &out, "--seed", "9", "simulate"]));
    // no --config: the saved copy, seed included, must match the manifest
    let rec = ok_json(qpt(&["--out", &out, "reconstruct"]));
    assert_eq!(rec["summaries"].as_array().unwrap().len(), 2);
    let e = err_json(&qpt(&["--out", &out, "--seed", "10", "reconstruct"]));
    assert_eq!(e["error"], "validation");
}

#[test]
fn results_do_not_depend_on_thread_count() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = setup(tmp.path());
    let mut hashes = Vec::new();
    for jobs in ["1", "3"] {
        let out = tmp.path().join(format!("out{jobs}")).display().to_string();
        let common = ["--config", cfg.as_str(), "--out", out.as_str(), "--jobs", jobs];
        ok_json(qpt(&[&common[..], &["simulate"]].concat()));
        let rec = ok_json(qpt(&[&common[..], &["reconstruct"]].concat()));
        hashes.push(rec["bundle_hash"].as_str().unwrap().to_string());
    }
    assert_eq!(hashes[0], hashes[1]);
}

#[test]
fn benchmark_writes_tables_and_plots() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = setup(tmp.path());
    let out = tmp.path().join("out");
    let b = ok_json(qpt(&["--config", &cfg, "--out", &out.display().to_string(), "benchmark"]));
    assert_eq!(b["noise_grid_rows"], 4);
    for f in ["noise_grid.csv", "noise_grid.svg", "anomaly.csv", "biased.csv", "biased_em.svg", "w1/cdf.svg", "w1/w1.csv"] {
        assert!(out.join("benchmark").join(f).is_file(), "{f} missing");
    }
}

#[test]
fn complexity_table() {
    let c = ok_json(qpt(&["complexity", "--qubits", "1", "--nx", "100"]));
    let shown: Vec<&str> = c["rows"].as_array().unwrap().iter().map(|r| r["display"].as_str().unwrap()).collect();
    assert_eq!(shown, ["12", "24", "1212", "2916"]);
}

#[test]
fn failures_report_json() {
    let tmp = tempfile::tempdir().unwrap();
    let bad = tmp.path().join("bad.toml");
    std::fs::write(&bad, "n_qubits = 3\n").unwrap();
    let out = qpt(&["--config", &bad.display().to_string(), "complexity"]);
    assert_eq!(out.status.code(), Some(1));
    let e = err_json(&out);
    assert_eq!(e["error"], "config");
    assert!(e["message"].as_str().unwrap().contains("n_qubits"));

    std::fs::write(&bad, "shots = \"many\"\n").unwrap();
    assert_eq!(err_json(&qpt(&["--config", &bad.display().to_string(), "simulate"]))["error"], "parse");

    let empty = tmp.path().join("nothing").display().to_string();
    assert_eq!(err_json(&qpt(&["--out", &empty, "reconstruct"]))["error"], "io");
    assert_eq!(err_json(&qpt(&["metrics", "--input", "/no/such.csv"]))["error"], "io");

    let usage = qpt(&["transmogrify"]);
    assert_eq!(usage.status.code(), Some(2));
    assert_eq!(err_json(&usage)["error"], "usage");
}
