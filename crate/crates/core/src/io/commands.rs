//! File-level commands behind the CLI verbs.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::config::RunConfig;
use super::files::{load_dataset, numbered, read_json, store, verify_manifest, write_json, write_text, FileKind, Manifest, MANIFEST};
use super::plot::{ecdf, heatmap, line_chart, Series};
use super::study::{
    anomaly_sweep, biased_grid, convergence_sweep, error_matrices, evaluate, noise_grid, simulate_experiment, train_twin,
    w1_comparison, ConvergenceRow, Evaluation, Experiment, GateRun, SweepRow,
};
use super::table::{read_csv, write_csv, FidelityRow, ResultBundle};
use crate::error::{QptError, Result};
use crate::experiment::{circuit_count, QptMethod, TomographyDataset};
use crate::metrics::{infidelity_log, XiWindow};
use crate::quantum::channel::ProcessMatrix;
use crate::seed::{named_seed, rng_from_seed};
use crate::twin::{latent_diagnostics, sample_twins, TrainingRecord, VaeModel};

pub const MODEL_FILE: &str = "twin/model.json";

/// Simulates the experiment and writes datasets plus manifest under
/// `cfg.output_dir`.
pub fn cmd_simulate(cfg: &RunConfig) -> Result<Manifest> {
    let exp = simulate_experiment(cfg)?;
    let dir = &cfg.output_dir;
    let mut files = Vec::with_capacity(exp.identity.len() + exp.gates.len());
    for (k, ds) in exp.identity.iter().enumerate() {
        files.push(store(dir, &numbered("identity", k), ds.tag.into(), ds)?);
    }
    for (k, g) in exp.gates.iter().enumerate() {
        let mut e = store(dir, &numbered("gates", k), FileKind::GateRun, &g.data)?;
        e.gate_label = Some(g.label.clone());
        e.target = Some(g.target.clone());
        e.identity_index = Some(g.identity_index);
        files.push(e);
    }
    let manifest = Manifest { config_hash: cfg.hash(), seed: cfg.seed, n_qubits: cfg.n_qubits, files };
    write_json(&dir.join(MANIFEST), &manifest)?;
    write_text(&dir.join("config.toml"), &cfg.to_toml()?)?;
    Ok(manifest)
}

/// Reads back what [`cmd_simulate`] wrote, after checking digests and the
/// config hash.
pub fn load_experiment(cfg: &RunConfig) -> Result<Experiment> {
    let dir = &cfg.output_dir;
    let manifest = verify_manifest(dir, Some(&cfg.hash()))?;
    let identity = manifest
        .of_kind(&[FileKind::IdentityRun, FileKind::Anomaly])
        .map(|e| load_dataset(&dir.join(&e.file)))
        .collect::<Result<Vec<TomographyDataset>>>()?;
    let gates = manifest
        .of_kind(&[FileKind::GateRun])
        .map(|e| {
            let missing = |what: &str| QptError::Parse { path: dir.join(MANIFEST).display().to_string(), message: format!("{} lacks {what}", e.file) };
            let identity_index = e.identity_index.ok_or_else(|| missing("identity_index"))?;
            if identity_index >= identity.len() {
                return Err(missing("a valid identity_index"));
            }
            Ok(GateRun {
                label: e.gate_label.clone().ok_or_else(|| missing("gate_label"))?,
                target: e.target.clone().ok_or_else(|| missing("target"))?,
                data: load_dataset(&dir.join(&e.file))?,
                identity_index,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    if identity.is_empty() {
        return Err(QptError::Empty(format!("identity batch in {}", dir.display())));
    }
    Ok(Experiment { n_qubits: manifest.n_qubits, identity, gates })
}

fn write_bundle(dir: &Path, bundle: &ResultBundle) -> Result<()> {
    write_csv(&dir.join("fidelities.csv"), &bundle.csv_rows())?;
    write_csv(&dir.join("w1.csv"), &bundle.w1)?;
    write_json(&dir.join("bundle.json"), bundle)
}

/// Reconstructs every gate run with the requested methods and writes
/// `results/`: fidelity CSV, W1 CSV, bundle JSON and per-gate reports.
/// ML-QPT reads the twin written by [`cmd_train_twin`].
pub fn cmd_reconstruct(cfg: &RunConfig, methods: &[QptMethod]) -> Result<ResultBundle> {
    let exp = load_experiment(cfg)?;
    let model = if methods.contains(&QptMethod::Ml) {
        Some(load_model(&cfg.output_dir.join(MODEL_FILE))?)
    } else {
        None
    };
    let ev = evaluate(cfg, &exp, methods, model.as_ref())?;
    let out = cfg.output_dir.join("results");
    write_bundle(&out, &ev.bundle)?;
    for (method, reports) in &ev.estimates {
        for (k, r) in reports.iter().enumerate() {
            write_json(&out.join(numbered(method, k)), r)?;
        }
    }
    Ok(ev.bundle)
}

pub fn load_model(path: &Path) -> Result<VaeModel> {
    let text = super::files::read_text(path)?;
    VaeModel::from_json(&text).map_err(|e| QptError::Parse { path: path.display().to_string(), message: e.to_string() })
}

#[derive(Debug, Clone)]
pub struct TrainOutcome {
    pub model: VaeModel,
    pub history: Vec<TrainingRecord>,
    pub convergence: Vec<ConvergenceRow>,
}

/// Trains a twin on the identity batch under `cfg.output_dir` and writes
/// `twin/`: model, loss history, latent statistics and, when subset sizes
/// are configured, the training-size convergence sweep.
pub fn cmd_train_twin(cfg: &RunConfig) -> Result<TrainOutcome> {
    let exp = load_experiment(cfg)?;
    let errors = error_matrices(&exp.identity, cfg)?;
    let (model, history) = train_twin(cfg, &errors)?;
    let dir = cfg.output_dir.join("twin");
    write_text(&cfg.output_dir.join(MODEL_FILE), &model.to_json()?)?;
    write_csv(&dir.join("history.csv"), &history)?;
    write_json(&dir.join("latent.json"), &latent_diagnostics(&model, &errors)?)?;
    let loss: Vec<Series> = vec![
        Series { name: "total".into(), points: history.iter().map(|r| (r.epoch as f64, r.total_loss)).collect(), steps: false },
        Series { name: "recon".into(), points: history.iter().map(|r| (r.epoch as f64, r.recon_loss)).collect(), steps: false },
    ];
    write_text(&dir.join("history.svg"), &line_chart("Twin training loss", "epoch", "loss", &loss, true))?;
    let convergence = if cfg.twin.subset_sizes.is_empty() {
        Vec::new()
    } else {
        let rows = convergence_sweep(cfg, &exp, &errors)?;
        write_csv(&dir.join("convergence.csv"), &rows)?;
        let s = Series {
            name: "ml".into(),
            points: rows.iter().map(|r| (r.subset_size as f64, r.ml_mean_infidelity)).collect(),
            steps: false,
        };
        write_text(
            &dir.join("convergence.svg"),
            &line_chart("ML-QPT vs training size", "training error matrices", "mean infidelity", &[s], true),
        )?;
        rows
    };
    Ok(TrainOutcome { model, history, convergence })
}

/// Samples `count` twins from a model file and writes them as χ JSON files
/// with a manifest under `out`.
pub fn cmd_sample_twin(model_path: &Path, count: usize, seed: u64, out: &Path) -> Result<Vec<ProcessMatrix>> {
    let model = load_model(model_path)?;
    let twins = sample_twins(&model, count, &mut rng_from_seed(named_seed(seed, "twin-sample")))?;
    let files = twins
        .iter()
        .enumerate()
        .map(|(k, t)| store(out, &numbered("twins", k), FileKind::Twin, t))
        .collect::<Result<Vec<_>>>()?;
    let manifest = Manifest {
        config_hash: super::sha256_hex(super::files::read_text(model_path)?.as_bytes()),
        seed,
        n_qubits: model.n_qubits,
        files,
    };
    write_json(&out.join(MANIFEST), &manifest)?;
    Ok(twins)
}

#[derive(Debug, Clone)]
pub struct BenchmarkOutcome {
    pub noise_grid: Vec<SweepRow>,
    pub anomaly: Vec<SweepRow>,
    pub biased: Vec<SweepRow>,
    pub w1: Evaluation,
}

fn sweep_chart(rows: &[SweepRow], title: &str, x_label: &str, extra: Option<Series>) -> String {
    let mut series: Vec<Series> = Vec::new();
    for r in rows {
        match series.iter_mut().find(|s| s.name == r.method) {
            Some(s) => s.points.push((r.x, r.mean_infidelity)),
            None => series.push(Series { name: r.method.clone(), points: vec![(r.x, r.mean_infidelity)], steps: false }),
        }
    }
    series.extend(extra);
    line_chart(title, x_label, "mean infidelity", &series, true)
}

/// Runs the configured sweeps and writes CSV and SVG files to `benchmark/`.
/// An empty grid skips that sweep.
pub fn cmd_benchmark(cfg: &RunConfig) -> Result<BenchmarkOutcome> {
    cfg.validate()?;
    let dir = cfg.output_dir.join("benchmark");
    let grid = if cfg.benchmark.lambda_tot.is_empty() { Vec::new() } else { noise_grid(cfg)? };
    if !grid.is_empty() {
        write_csv(&dir.join("noise_grid.csv"), &grid)?;
        let floor = (cfg.shots > 0).then(|| Series {
            name: "1/N_shot".into(),
            points: cfg.benchmark.lambda_tot.iter().map(|&l| (l, 1.0 / cfg.shots as f64)).collect(),
            steps: false,
        });
        write_text(&dir.join("noise_grid.svg"), &sweep_chart(&grid, "Infidelity vs SPAM error", "lambda_tot", floor))?;
    }
    let anomaly = if cfg.benchmark.anomaly_p.is_empty() { Vec::new() } else { anomaly_sweep(cfg)? };
    if !anomaly.is_empty() {
        write_csv(&dir.join("anomaly.csv"), &anomaly)?;
        write_text(&dir.join("anomaly.svg"), &sweep_chart(&anomaly, "Anomaly robustness", "anomaly proportion", None))?;
    }
    let biased = if cfg.benchmark.biased_axis.is_empty() { Vec::new() } else { biased_grid(cfg)? };
    if !biased.is_empty() {
        write_csv(&dir.join("biased.csv"), &biased)?;
        let axis = &cfg.benchmark.biased_axis;
        for method in ["std", "em"] {
            let values: Vec<Vec<f64>> = axis
                .iter()
                .map(|&m| {
                    axis.iter()
                        .map(|&sp| {
                            biased
                                .iter()
                                .find(|r| r.method == method && r.x == sp && r.y == m)
                                .map_or(f64::NAN, |r| r.mean_infidelity)
                        })
                        .collect()
                })
                .collect();
            write_text(
                &dir.join(format!("biased_{method}.svg")),
                &heatmap(&format!("{method} mean infidelity"), "lambda_sp", "lambda_m", axis, axis, &values),
            )?;
        }
    }
    let w1 = w1_comparison(cfg)?;
    write_bundle(&dir.join("w1"), &w1.bundle)?;
    let mut cdfs: Vec<Series> = ["std", "em"]
        .iter()
        .map(|m| Series {
            name: m.to_string(),
            points: ecdf(&w1.bundle.rows.iter().filter(|r| r.method == *m).map(|r| r.q).collect::<Vec<_>>()),
            steps: true,
        })
        .collect();
    let ml_q: Vec<f64> = w1
        .ml_twin_fidelities
        .iter()
        .flatten()
        .map(|&f| infidelity_log(f, cfg.metrics.xi_min, cfg.metrics.xi_max))
        .collect();
    cdfs.push(Series { name: "ml".into(), points: ecdf(&ml_q), steps: true });
    write_text(&dir.join("w1/cdf.svg"), &line_chart("Log-infidelity CDF, X gate", "log10(1 - F)", "CDF", &cdfs, false))?;
    Ok(BenchmarkOutcome { noise_grid: grid, anomaly, biased, w1 })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ComplexityRow {
    pub method: String,
    pub n_qubits: usize,
    pub n_x: u64,
    pub circuits: u64,
    pub lower_bound: bool,
}

impl ComplexityRow {
    pub fn display(&self) -> String {
        format!("{}{}", if self.lower_bound { ">=" } else { "" }, self.circuits)
    }
}

/// Circuit counts for std, em, ml and lsgst.
pub fn cmd_complexity(n_qubits: usize, n_x: u64) -> Result<Vec<ComplexityRow>> {
    [QptMethod::Std, QptMethod::Em, QptMethod::Ml, QptMethod::Lsgst]
        .into_iter()
        .map(|m| {
            let c = circuit_count(m, n_qubits, n_x)?;
            Ok(ComplexityRow {
                method: format!("{m:?}").to_lowercase(),
                n_qubits,
                n_x,
                circuits: c.circuits,
                lower_bound: c.lower_bound,
            })
        })
        .collect()
}

/// Recomputes summaries and W1 distances from a fidelity CSV (summary rows
/// in the input are ignored) and writes `metrics.csv` and `metrics.json`
/// into `out`.
pub fn cmd_metrics(input: &Path, window: &XiWindow, out: &Path) -> Result<ResultBundle> {
    window.validate()?;
    let rows: Vec<FidelityRow> = read_csv::<FidelityRow>(input)?
        .into_iter()
        .filter(|r| !r.is_summary())
        .map(|r| FidelityRow { q: infidelity_log(r.fidelity, window.xi_min, window.xi_max), ..r })
        .collect();
    if rows.is_empty() {
        return Err(QptError::Empty(format!("fidelity rows in {}", input.display())));
    }
    let digest = super::sha256_hex(super::files::read_text(input)?.as_bytes());
    let bundle = ResultBundle::from_rows(digest, 0, rows, window, &[])?;
    write_csv(&out.join("metrics.csv"), &bundle.csv_rows())?;
    write_csv(&out.join("w1.csv"), &bundle.w1)?;
    write_json(&out.join("metrics.json"), &bundle)?;
    Ok(bundle)
}

/// Reads a fidelity CSV back into rows.
pub fn read_fidelities(path: &Path) -> Result<Vec<FidelityRow>> {
    read_csv(path)
}

pub fn results_dir(cfg: &RunConfig) -> PathBuf {
    cfg.output_dir.join("results")
}

pub fn read_bundle(path: &Path) -> Result<ResultBundle> {
    read_json(path)
}
