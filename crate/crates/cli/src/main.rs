use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde_json::{json, Value};

use qpt_core::experiment::QptMethod;
use qpt_core::io::{
    cmd_benchmark, cmd_complexity, cmd_metrics, cmd_reconstruct, cmd_sample_twin, cmd_simulate, cmd_train_twin,
    RunConfig, MODEL_FILE,
};
use qpt_core::QptError;

/// SPAM-error-mitigated quantum process tomography.
#[derive(Debug, Parser)]
#[command(name = "qpt", version)]
struct Cli {
    #[command(flatten)]
    common: Common,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Args)]
struct Common {
    /// TOML run configuration. Without it, `<out>/config.toml` is used when
    /// present, then built-in defaults.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Master seed, overriding the config.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Output directory, overriding the config.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Comma-separated methods: std, em, ml.
    #[arg(long, global = true, value_delimiter = ',', value_parser = parse_method)]
    method: Vec<QptMethod>,
    /// Worker threads; 0 lets the pool decide.
    #[arg(long, global = true)]
    jobs: Option<usize>,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Simulate the identity batch and gate runs and write them to disk.
    Simulate,
    /// Reconstruct the simulated gates with the chosen methods.
    Reconstruct,
    /// Train the error-matrix twin on the simulated identity batch.
    TrainTwin,
    /// Decode twins from a trained model.
    SampleTwin {
        /// Model file; defaults to the one written by train-twin.
        #[arg(long)]
        model: Option<PathBuf>,
        /// Number of twins; defaults to `twin.n_twins`.
        #[arg(long)]
        count: Option<usize>,
    },
    /// Noise grid, anomaly sweep, biased-SPAM grid and W1 comparison.
    Benchmark,
    /// Circuit counts per method.
    Complexity {
        #[arg(long)]
        qubits: Option<usize>,
        /// Identity runs behind ML-QPT; defaults to `n_error_matrices`.
        #[arg(long)]
        nx: Option<u64>,
    },
    /// Recompute log-infidelities and W1 from a fidelity table.
    Metrics {
        #[arg(long)]
        input: PathBuf,
    },
}

fn parse_method(s: &str) -> Result<QptMethod, String> {
    match s.trim().to_ascii_lowercase().as_str() {
        "std" => Ok(QptMethod::Std),
        "em" => Ok(QptMethod::Em),
        "ml" => Ok(QptMethod::Ml),
        other => Err(format!("unknown method `{other}`; expected std, em or ml")),
    }
}

struct Failure {
    kind: &'static str,
    message: String,
    code: u8,
}

impl From<QptError> for Failure {
    fn from(e: QptError) -> Self {
        Failure { kind: e.kind(), message: e.to_string(), code: 1 }
    }
}

fn load_config(common: &Common) -> Result<RunConfig, QptError> {
    let mut cfg = match &common.config {
        Some(path) => RunConfig::load(path)?,
        None => {
            let out = common.out.clone().unwrap_or_else(|| RunConfig::default().output_dir);
            let saved = out.join("config.toml");
            if saved.is_file() {
                RunConfig::load(&saved)?
            } else {
                RunConfig::default()
            }
        }
    };
    if let Some(seed) = common.seed {
        cfg.seed = seed;
    }
    if let Some(out) = &common.out {
        cfg.output_dir = out.clone();
    }
    if let Some(jobs) = common.jobs {
        cfg.jobs = jobs;
    }
    cfg.validate()?;
    Ok(cfg)
}

fn methods_or(common: &Common, default: &[QptMethod]) -> Vec<QptMethod> {
    if common.method.is_empty() {
        default.to_vec()
    } else {
        common.method.clone()
    }
}

fn path_str(p: &Path) -> String {
    p.display().to_string()
}

fn run(cli: Cli) -> Result<Value, Failure> {
    let cfg = load_config(&cli.common)?;
    if cfg.jobs > 0 {
        rayon::ThreadPoolBuilder::new()
            .num_threads(cfg.jobs)
            .build_global()
            .map_err(|e| Failure { kind: "threads", message: e.to_string(), code: 1 })?;
    }
    let out = &cfg.output_dir;
    let value = match cli.command {
        Command::Simulate => {
            let m = cmd_simulate(&cfg)?;
            json!({
                "command": "simulate",
                "out": path_str(out),
                "config_hash": m.config_hash,
                "files": m.files.len(),
                "anomalies": m.anomaly_count(),
            })
        }
        Command::Reconstruct => {
            let methods = methods_or(&cli.common, &[QptMethod::Std, QptMethod::Em]);
            let b = cmd_reconstruct(&cfg, &methods)?;
            json!({
                "command": "reconstruct",
                "out": path_str(&out.join("results")),
                "bundle_hash": b.hash(),
                "summaries": b.summaries.iter().map(|s| json!({
                    "method": s.method,
                    "mean_fidelity": s.fidelity.mean,
                    "mean_infidelity": s.infidelity.mean,
                    "w1": b.w1_of(&s.method),
                })).collect::<Vec<_>>(),
            })
        }
        Command::TrainTwin => {
            let t = cmd_train_twin(&cfg)?;
            let last = t.history.last().map(|r| r.total_loss);
            json!({
                "command": "train-twin",
                "model": path_str(&out.join(MODEL_FILE)),
                "epochs": t.history.len(),
                "final_loss": last,
                "convergence": t.convergence,
            })
        }
        Command::SampleTwin { model, count } => {
            let model = model.unwrap_or_else(|| out.join(MODEL_FILE));
            let count = count.unwrap_or(cfg.twin.n_twins);
            let twins = cmd_sample_twin(&model, count, cfg.seed, out)?;
            json!({ "command": "sample-twin", "out": path_str(&out.join("twins")), "count": twins.len() })
        }
        Command::Benchmark => {
            let b = cmd_benchmark(&cfg)?;
            json!({
                "command": "benchmark",
                "out": path_str(&out.join("benchmark")),
                "noise_grid_rows": b.noise_grid.len(),
                "anomaly_rows": b.anomaly.len(),
                "biased_rows": b.biased.len(),
                "w1": b.w1.bundle.w1,
            })
        }
        Command::Complexity { qubits, nx } => {
            let rows = cmd_complexity(qubits.unwrap_or(cfg.n_qubits), nx.unwrap_or(cfg.n_error_matrices as u64))?;
            json!({
                "command": "complexity",
                "rows": rows.iter().map(|r| json!({
                    "method": r.method,
                    "n_qubits": r.n_qubits,
                    "n_x": r.n_x,
                    "circuits": r.circuits,
                    "lower_bound": r.lower_bound,
                    "display": r.display(),
                })).collect::<Vec<_>>(),
            })
        }
        Command::Metrics { input } => {
            let b = cmd_metrics(&input, &cfg.metrics, out)?;
            json!({ "command": "metrics", "out": path_str(out), "w1": b.w1, "input_sha256": b.config_hash })
        }
    };
    Ok(value)
}

fn main() -> ExitCode {
    let result = match Cli::try_parse() {
        Ok(cli) => run(cli),
        Err(e) if !e.use_stderr() => {
            // --help and --version
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => Err(Failure { kind: "usage", message: e.render().to_string().trim_end().to_string(), code: 2 }),
    };
    match result {
        Ok(value) => {
            println!("{value}");
            ExitCode::SUCCESS
        }
        Err(f) => {
            eprintln!("{}", json!({ "error": f.kind, "message": f.message }));
            ExitCode::from(f.code)
        }
    }
}
