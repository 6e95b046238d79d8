//! Run configuration, read from TOML.

use std::path::{Path, PathBuf};

use rand::Rng as _;
use serde::{Deserialize, Serialize};

use crate::error::{QptError, Result};
use crate::metrics::XiWindow;
use crate::noise::{haar_random_gate, random_cptp, NoiseSpec};
use crate::quantum::channel::ProcessMatrix;
use crate::quantum::matrix::{c, from_rows, ZERO};
use crate::quantum::unitary_to_chi;
use crate::seed::Rng;
use crate::tomography::ReconstructionOptions;
use crate::twin::{TrainOptions, VaeConfig};

use super::sha256_hex;

/// Target processes used for the gate runs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TargetKind {
    /// Haar-random unitary per gate.
    Haar,
    /// Random CPTP channel with Kraus rank uniform in `[1, 4^N]`.
    RandomCptp,
    /// Pauli X on every qubit.
    X,
    /// Controlled-Z, two qubits only.
    Cz,
}

impl TargetKind {
    pub fn label(self) -> &'static str {
        match self {
            TargetKind::Haar => "haar",
            TargetKind::RandomCptp => "random-cptp",
            TargetKind::X => "x",
            TargetKind::Cz => "cz",
        }
    }

    pub fn sample(self, n_qubits: usize, rng: &mut Rng) -> Result<ProcessMatrix> {
        match self {
            TargetKind::Haar => haar_random_gate(n_qubits, rng),
            TargetKind::RandomCptp => {
                let rank = rng.random_range(1..=4usize.pow(n_qubits as u32));
                random_cptp(n_qubits, rank, rng)
            }
            TargetKind::X => {
                let d = 1usize << n_qubits;
                // X^{⊗N} flips every bit
                let u = crate::quantum::matrix::ComplexMatrix::from_fn(d, d, |i, j| {
                    if i == (d - 1) ^ j {
                        c(1.0, 0.0)
                    } else {
                        ZERO
                    }
                });
                unitary_to_chi(&u)
            }
            TargetKind::Cz => {
                if n_qubits != 2 {
                    return Err(QptError::Config {
                        field: "target".into(),
                        message: format!("cz needs n_qubits = 2, got {n_qubits}"),
                    });
                }
                let one = c(1.0, 0.0);
                let mut e = vec![ZERO; 16];
                e[0] = one;
                e[5] = one;
                e[10] = one;
                e[15] = -one;
                unitary_to_chi(&from_rows(4, 4, &e))
            }
        }
    }
}

/// Twin architecture, training and sampling settings.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TwinSettings {
    pub vae: VaeConfig,
    pub training: TrainOptions,
    /// Twins drawn per ML-QPT evaluation.
    pub n_twins: usize,
    /// Training-subset sizes for the convergence sweep; empty disables it.
    pub subset_sizes: Vec<usize>,
}

impl Default for TwinSettings {
    fn default() -> Self {
        TwinSettings {
            vae: VaeConfig::default(),
            training: TrainOptions::default(),
            n_twins: 100,
            subset_sizes: Vec::new(),
        }
    }
}

/// Sweep grids for `benchmark`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BenchmarkSettings {
    /// `λ_tot` values with `λ1 = λ2 = λ_tot`.
    pub lambda_tot: Vec<f64>,
    /// Anomaly proportions, applied to training and live error matrices.
    pub anomaly_p: Vec<f64>,
    /// Axis values for the `(λ_sp, λ_m)` grid; `λ2` is taken from `[noise]`.
    pub biased_axis: Vec<f64>,
    /// Include ML-QPT in the λ_tot grid (trains one twin per point).
    pub grid_ml: bool,
    /// Gate runs for the W1 comparison on the X gate.
    pub w1_runs: usize,
}

impl Default for BenchmarkSettings {
    fn default() -> Self {
        BenchmarkSettings {
            lambda_tot: vec![0.0, 0.02, 0.05, 0.1],
            anomaly_p: vec![0.0, 0.02, 0.04, 0.06, 0.08, 0.1],
            biased_axis: vec![0.0, 0.05, 0.1],
            grid_ml: false,
            w1_runs: 100,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub n_qubits: usize,
    /// Shots per circuit; 0 stores exact probabilities.
    pub shots: u64,
    pub n_gates: usize,
    /// Identity runs in the error-matrix batch (`N_x`).
    pub n_error_matrices: usize,
    pub target: TargetKind,
    pub seed: u64,
    pub output_dir: PathBuf,
    /// Worker threads; 0 lets the pool decide.
    pub jobs: usize,
    pub noise: NoiseSpec,
    pub reconstruction: ReconstructionOptions,
    pub twin: TwinSettings,
    pub metrics: XiWindow,
    pub benchmark: BenchmarkSettings,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            n_qubits: 1,
            shots: 10_000,
            n_gates: 20,
            n_error_matrices: 100,
            target: TargetKind::Haar,
            seed: 0,
            output_dir: PathBuf::from("out"),
            jobs: 0,
            noise: NoiseSpec::noiseless(),
            reconstruction: ReconstructionOptions::default(),
            twin: TwinSettings::default(),
            metrics: XiWindow::default(),
            benchmark: BenchmarkSettings::default(),
        }
    }
}

fn field(field: &str, message: impl Into<String>) -> QptError {
    QptError::Config { field: field.into(), message: message.into() }
}

impl RunConfig {
    pub fn from_toml_str(text: &str, origin: &str) -> Result<RunConfig> {
        let cfg: RunConfig = toml::from_str(text).map_err(|e| QptError::Parse {
            path: origin.into(),
            message: e.to_string().trim_end().to_string(),
        })?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<RunConfig> {
        let text = std::fs::read_to_string(path).map_err(|source| QptError::Io { path: path.display().to_string(), source })?;
        RunConfig::from_toml_str(&text, &path.display().to_string())
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string_pretty(self).map_err(|e| QptError::Parse { path: "<config>".into(), message: e.to_string() })
    }

    pub fn validate(&self) -> Result<()> {
        if !(1..=2).contains(&self.n_qubits) {
            return Err(field("n_qubits", format!("must be 1 or 2, got {}", self.n_qubits)));
        }
        if self.n_gates == 0 {
            return Err(field("n_gates", "must be at least 1"));
        }
        if self.n_error_matrices == 0 {
            return Err(field("n_error_matrices", "must be at least 1"));
        }
        if self.target == TargetKind::Cz && self.n_qubits != 2 {
            return Err(field("target", "cz needs n_qubits = 2"));
        }
        if self.output_dir.as_os_str().is_empty() {
            return Err(field("output_dir", "must not be empty"));
        }
        self.noise.validate()?;
        self.reconstruction.validate()?;
        self.twin.vae.validate().map_err(|e| prefix("twin.", e))?;
        self.twin.training.validate().map_err(|e| prefix("twin.", e))?;
        if self.twin.n_twins == 0 {
            return Err(field("twin.n_twins", "must be at least 1"));
        }
        for (k, &s) in self.twin.subset_sizes.iter().enumerate() {
            if s == 0 || s > self.n_error_matrices {
                return Err(field(
                    &format!("twin.subset_sizes[{k}]"),
                    format!("must be in 1..={}, got {s}", self.n_error_matrices),
                ));
            }
        }
        self.metrics.validate()?;
        let unit = |name: &str, values: &[f64]| -> Result<()> {
            for (k, &v) in values.iter().enumerate() {
                if !(0.0..=1.0).contains(&v) {
                    return Err(field(&format!("benchmark.{name}[{k}]"), format!("must lie in [0, 1], got {v}")));
                }
            }
            Ok(())
        };
        unit("lambda_tot", &self.benchmark.lambda_tot)?;
        unit("anomaly_p", &self.benchmark.anomaly_p)?;
        unit("biased_axis", &self.benchmark.biased_axis)?;
        if self.benchmark.w1_runs == 0 {
            return Err(field("benchmark.w1_runs", "must be at least 1"));
        }
        Ok(())
    }

    /// SHA-256 of the canonical JSON form. The output directory and thread
    /// count do not change results and are excluded.
    pub fn hash(&self) -> String {
        let mut canon = self.clone();
        canon.output_dir = PathBuf::new();
        canon.jobs = 0;
        sha256_hex(serde_json::to_string(&canon).expect("config serializes").as_bytes())
    }
}

fn prefix(p: &str, e: QptError) -> QptError {
    match e {
        QptError::Config { field, message } => QptError::Config { field: format!("{p}{field}"), message },
        other => other,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metrics::process_fidelity;
    use crate::seed::rng_from_seed;

    #[test]
    fn defaults_validate_and_round_trip() {
        let cfg = RunConfig::default();
        cfg.validate().unwrap();
        let text = cfg.to_toml().unwrap();
        let back = RunConfig::from_toml_str(&text, "mem").unwrap();
        assert_eq!(back, cfg);
        assert_eq!(back.hash(), cfg.hash());
    }

    #[test]
    fn partial_file_fills_defaults() {
        let cfg = RunConfig::from_toml_str("n_qubits = 2\n[noise]\nlambda1 = 0.1\nlambda2 = 0.1\n", "mem").unwrap();
        assert_eq!(cfg.n_qubits, 2);
        assert_eq!(cfg.shots, 10_000);
        assert_eq!(cfg.noise.lambda_tot(), 0.1);
    }

    #[test]
    fn errors_name_the_field() {
        let e = RunConfig::from_toml_str("[noise]\nlambda1 = 1.5\nlambda2 = 0.0\n", "mem").unwrap_err();
        assert!(matches!(e, QptError::Config { ref field, .. } if field == "noise.lambda1"), "{e}");
        let e = RunConfig::from_toml_str("[twin.training]\nepochs = 0\n", "mem").unwrap_err();
        assert!(matches!(e, QptError::Config { ref field, .. } if field == "twin.training.epochs"), "{e}");
        let e = RunConfig::from_toml_str("n_error_matrices = 10\n[twin]\nsubset_sizes = [5, 50]\n", "mem").unwrap_err();
        assert!(matches!(e, QptError::Config { ref field, .. } if field == "twin.subset_sizes[1]"), "{e}");
        let e = RunConfig::from_toml_str("bogus = 1\n", "mem").unwrap_err();
        assert!(matches!(e, QptError::Parse { .. }));
    }

    #[test]
    fn hash_ignores_output_location() {
        let a = RunConfig::default();
        let b = RunConfig { output_dir: "elsewhere".into(), jobs: 4, ..RunConfig::default() };
        assert_eq!(a.hash(), b.hash());
        let c = RunConfig { seed: 1, ..RunConfig::default() };
        assert_ne!(a.hash(), c.hash());
    }

    #[test]
    fn named_targets() {
        let mut rng = rng_from_seed(0);
        let x = TargetKind::X.sample(1, &mut rng).unwrap();
        // χ of X has weight only on the X Pauli
        assert!((x.chi()[(1, 1)].re - 1.0).abs() < 1e-14);
        let cz = TargetKind::Cz.sample(2, &mut rng).unwrap();
        // CZ = (II + IZ + ZI − ZZ)/2
        for k in [0, 3, 12, 15] {
            assert!((cz.chi()[(k, k)].re - 0.25).abs() < 1e-14);
        }
        assert!((cz.chi()[(0, 15)].re + 0.25).abs() < 1e-14);
        assert!(TargetKind::Cz.sample(1, &mut rng).is_err());
        let ch = TargetKind::RandomCptp.sample(1, &mut rng).unwrap();
        assert!(process_fidelity(&ch, &ch).unwrap() > 1.0 - 1e-9);
    }
}
