//! In-memory pipelines: simulate an experiment, evaluate the three QPT
//! methods on it, train twins and run the benchmark sweeps.

use rand::seq::SliceRandom;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::config::RunConfig;
use super::table::{FidelityRow, ResultBundle};
use crate::error::{QptError, Result};
use crate::experiment::{collect_error_runs, simulate_qpt, QptMethod, TomographyDataset};
use crate::metrics::{infidelity_log, mean, process_fidelity, summarize};
use crate::noise::{CoherentTargets, NoiseSpec, SplitMode};
use crate::quantum::channel::ProcessMatrix;
use crate::seed::{child_seed, named_seed, rng_from_seed};
use crate::tomography::{em_qpt_report, std_qpt, std_qpt_report, ReconstructionReport};
use crate::twin::{train, TrainingRecord, TwinBank, VaeModel};

#[derive(Debug, Clone)]
pub struct GateRun {
    pub label: String,
    pub target: ProcessMatrix,
    pub data: TomographyDataset,
    /// Identity run that shares this run's SPAM realisation.
    pub identity_index: usize,
}

#[derive(Debug, Clone)]
pub struct Experiment {
    pub n_qubits: usize,
    /// Error-matrix batch; identity or anomaly runs.
    pub identity: Vec<TomographyDataset>,
    pub gates: Vec<GateRun>,
}

/// Identity batch of `N_x` runs, then `n_gates` gate runs. Gate `k` reuses
/// the SPAM realisation of identity run `k mod N_x`, as when an identity
/// tomography is taken right before the gate tomography.
pub fn simulate_experiment(cfg: &RunConfig) -> Result<Experiment> {
    cfg.validate()?;
    let n = cfg.n_qubits;
    let mut id_rng = rng_from_seed(named_seed(cfg.seed, "identity-batch"));
    let identity = collect_error_runs(cfg.n_error_matrices, &cfg.noise, n, cfg.shots, &mut id_rng)?;
    let mut target_rng = rng_from_seed(named_seed(cfg.seed, "targets"));
    let targets = (0..cfg.n_gates)
        .map(|_| cfg.target.sample(n, &mut target_rng))
        .collect::<Result<Vec<_>>>()?;
    let base = named_seed(cfg.seed, "gate-runs");
    let gates = targets
        .into_par_iter()
        .enumerate()
        .map(|(k, target)| {
            let identity_index = k % identity.len();
            let mut rng = rng_from_seed(child_seed(base, k as u64));
            let data = simulate_qpt(&target, &identity[identity_index].spam, cfg.shots, &mut rng)?;
            Ok(GateRun { label: format!("{}-{k:04}", cfg.target.label()), target, data, identity_index })
        })
        .collect::<Result<Vec<_>>>()?;
    let identity = identity.into_iter().map(|r| r.dataset).collect();
    Ok(Experiment { n_qubits: n, identity, gates })
}

/// std-QPT of every identity run.
pub fn error_matrices(runs: &[TomographyDataset], cfg: &RunConfig) -> Result<Vec<ProcessMatrix>> {
    runs.par_iter().map(|d| std_qpt(d, &cfg.reconstruction)).collect()
}

/// Trains a twin on `errors` with the configured architecture and seed streams.
pub fn train_twin(cfg: &RunConfig, errors: &[ProcessMatrix]) -> Result<(VaeModel, Vec<TrainingRecord>)> {
    let first = errors.first().ok_or_else(|| QptError::Empty("error-matrix batch".into()))?;
    let model = VaeModel::new(first.n_qubits(), &cfg.twin.vae, named_seed(cfg.seed, "twin-init"))?;
    let mut rng = rng_from_seed(named_seed(cfg.seed, "twin-train"));
    let (model, history) = train(model, errors, &cfg.twin.training, &mut rng)?;
    let first_loss = history.first().map_or(f64::NAN, |r| r.total_loss);
    let last_loss = history.last().map_or(f64::NAN, |r| r.total_loss);
    if !last_loss.is_finite() || !first_loss.is_finite() {
        return Err(QptError::NonConvergence {
            context: format!("twin training diverged (loss {first_loss} -> {last_loss})"),
            iterations: history.len(),
            residual: last_loss,
        });
    }
    Ok((model, history))
}

#[derive(Debug, Clone)]
pub struct Evaluation {
    pub bundle: ResultBundle,
    /// Per-gate reconstruction reports for std and em, keyed by method name.
    pub estimates: Vec<(String, Vec<ReconstructionReport>)>,
    /// Per-gate fidelity of every twin.
    pub ml_twin_fidelities: Vec<Vec<f64>>,
}

fn row(method: &str, label: &str, fidelity: f64, cfg: &RunConfig) -> FidelityRow {
    FidelityRow {
        method: method.into(),
        gate_label: label.into(),
        fidelity,
        q: infidelity_log(fidelity, cfg.metrics.xi_min, cfg.metrics.xi_max),
    }
}

fn method_key(m: QptMethod) -> Result<&'static str> {
    match m {
        QptMethod::Std => Ok("std"),
        QptMethod::Em => Ok("em"),
        QptMethod::Ml => Ok("ml"),
        QptMethod::Lsgst => Err(QptError::Validation("lsgst has a circuit count only; it cannot be evaluated".into())),
    }
}

/// Fidelity of each method on each gate of `exp`. ML-QPT needs `model`; its
/// per-gate fidelity is the mean over twins and its W1 uses every twin.
pub fn evaluate(cfg: &RunConfig, exp: &Experiment, methods: &[QptMethod], model: Option<&VaeModel>) -> Result<Evaluation> {
    if methods.is_empty() {
        return Err(QptError::Empty("method list".into()));
    }
    let keys = methods.iter().map(|&m| method_key(m)).collect::<Result<Vec<_>>>()?;
    let opts = &cfg.reconstruction;
    let bank = if methods.contains(&QptMethod::Ml) {
        let model = model.ok_or_else(|| QptError::Validation("ml needs a trained twin model".into()))?;
        if model.n_qubits != exp.n_qubits {
            return Err(QptError::Shape("twin model and experiment differ in qubit count".into()));
        }
        let mut rng = rng_from_seed(named_seed(cfg.seed, "twin-sample"));
        Some(TwinBank::sample(model, cfg.twin.n_twins, opts, &mut rng)?)
    } else {
        None
    };
    let errors: Vec<Option<ProcessMatrix>> = if methods.contains(&QptMethod::Em) {
        let mut used = vec![false; exp.identity.len()];
        for g in &exp.gates {
            used[g.identity_index] = true;
        }
        exp.identity
            .par_iter()
            .zip(used.par_iter())
            .map(|(run, &u)| if u { std_qpt(run, opts).map(Some) } else { Ok(None) })
            .collect::<Result<Vec<_>>>()?
    } else {
        Vec::new()
    };

    struct PerGate {
        fid: Vec<f64>,
        est: Vec<Option<ReconstructionReport>>,
        twins: Vec<f64>,
    }
    let per_gate = exp
        .gates
        .par_iter()
        .map(|g| {
            let mut out = PerGate { fid: Vec::new(), est: Vec::new(), twins: Vec::new() };
            for &m in methods {
                match m {
                    QptMethod::Std | QptMethod::Em => {
                        let report = if m == QptMethod::Std {
                            std_qpt_report(&g.data, opts)?
                        } else {
                            let err = errors[g.identity_index].as_ref().expect("error matrix computed");
                            em_qpt_report(&g.data, err, opts)?
                        };
                        out.fid.push(process_fidelity(&report.chi, &g.target)?);
                        out.est.push(Some(report));
                    }
                    QptMethod::Ml => {
                        let ens = bank.as_ref().expect("bank sampled").reconstruct(&g.data, opts)?;
                        out.twins = ens.iter().map(|c| process_fidelity(c, &g.target)).collect::<Result<_>>()?;
                        out.fid.push(mean(&out.twins));
                        out.est.push(None);
                    }
                    QptMethod::Lsgst => unreachable!("rejected above"),
                }
            }
            Ok(out)
        })
        .collect::<Result<Vec<_>>>()?;

    let mut rows = Vec::with_capacity(exp.gates.len() * methods.len());
    let mut estimates: Vec<(String, Vec<ReconstructionReport>)> = Vec::new();
    for (g, pg) in exp.gates.iter().zip(&per_gate) {
        for (k, key) in keys.iter().enumerate() {
            rows.push(row(key, &g.label, pg.fid[k], cfg));
            if let Some(chi) = &pg.est[k] {
                match estimates.iter_mut().find(|(name, _)| name == key) {
                    Some((_, v)) => v.push(chi.clone()),
                    None => estimates.push((key.to_string(), vec![chi.clone()])),
                }
            }
        }
    }
    let ml_twin_fidelities: Vec<Vec<f64>> = per_gate.into_iter().map(|p| p.twins).collect();
    let mut extra = Vec::new();
    if bank.is_some() {
        let q = ml_twin_fidelities
            .iter()
            .flatten()
            .map(|&f| infidelity_log(f, cfg.metrics.xi_min, cfg.metrics.xi_max))
            .collect();
        extra.push(("ml".to_string(), q));
    }
    let bundle = ResultBundle::from_rows(cfg.hash(), cfg.seed, rows, &cfg.metrics, &extra)?;
    Ok(Evaluation { bundle, estimates, ml_twin_fidelities })
}

/// Simulate, train a twin when ML is requested, evaluate.
pub fn run_study(cfg: &RunConfig, methods: &[QptMethod]) -> Result<Evaluation> {
    let exp = simulate_experiment(cfg)?;
    let model = if methods.contains(&QptMethod::Ml) {
        Some(train_twin(cfg, &error_matrices(&exp.identity, cfg)?)?.0)
    } else {
        None
    };
    evaluate(cfg, &exp, methods, model.as_ref())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceRow {
    pub subset_size: usize,
    pub ml_mean_infidelity: f64,
    pub final_loss: f64,
}

/// ML-QPT infidelity on the experiment's gates for twins trained on random
/// subsets (drawn without replacement) of the error-matrix batch.
pub fn convergence_sweep(cfg: &RunConfig, exp: &Experiment, errors: &[ProcessMatrix]) -> Result<Vec<ConvergenceRow>> {
    let mut order: Vec<usize> = (0..errors.len()).collect();
    order.shuffle(&mut rng_from_seed(named_seed(cfg.seed, "subsets")));
    cfg.twin
        .subset_sizes
        .iter()
        .map(|&size| {
            if size == 0 || size > errors.len() {
                return Err(QptError::Validation(format!("subset size {size} exceeds batch of {}", errors.len())));
            }
            let subset: Vec<ProcessMatrix> = order[..size].iter().map(|&i| errors[i].clone()).collect();
            let (model, history) = train_twin(cfg, &subset)?;
            let ev = evaluate(cfg, exp, &[QptMethod::Ml], Some(&model))?;
            Ok(ConvergenceRow {
                subset_size: size,
                ml_mean_infidelity: mean(&ev.bundle.infidelities("ml")),
                final_loss: history.last().map_or(f64::NAN, |r| r.total_loss),
            })
        })
        .collect()
}

/// One point of a benchmark sweep.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub sweep: String,
    /// `λ_tot`, anomaly proportion, or `λ_sp` depending on the sweep.
    pub x: f64,
    /// `λ_m` for the biased grid, otherwise 0.
    pub y: f64,
    pub method: String,
    pub mean_infidelity: f64,
    pub std_infidelity: f64,
    pub median_infidelity: f64,
    /// Fraction of gates with infidelity above 0.1.
    pub failure_fraction: f64,
}

fn sweep_rows(sweep: &str, x: f64, y: f64, bundle: &ResultBundle) -> Result<Vec<SweepRow>> {
    bundle
        .summaries
        .iter()
        .map(|s| {
            let inf = bundle.infidelities(&s.method);
            let fails = inf.iter().filter(|&&v| v > 0.1).count();
            let sm = summarize(&inf)?;
            Ok(SweepRow {
                sweep: sweep.into(),
                x,
                y,
                method: s.method.clone(),
                mean_infidelity: sm.mean,
                std_infidelity: sm.std,
                median_infidelity: sm.median,
                failure_fraction: fails as f64 / inf.len() as f64,
            })
        })
        .collect()
}

fn with_noise(cfg: &RunConfig, noise: NoiseSpec, stream: u64) -> RunConfig {
    RunConfig { noise, seed: child_seed(cfg.seed, stream), ..cfg.clone() }
}

/// `λ1 = λ2 = λ_tot` grid.
pub fn noise_grid(cfg: &RunConfig) -> Result<Vec<SweepRow>> {
    let mut methods = vec![QptMethod::Std, QptMethod::Em];
    if cfg.benchmark.grid_ml {
        methods.push(QptMethod::Ml);
    }
    let mut out = Vec::new();
    for (k, &lam) in cfg.benchmark.lambda_tot.iter().enumerate() {
        let noise = NoiseSpec { lambda1: lam, lambda2: lam, ..cfg.noise.clone() };
        let ev = run_study(&with_noise(cfg, noise, k as u64), &methods)?;
        out.extend(sweep_rows("lambda_tot", lam, 0.0, &ev.bundle)?);
    }
    Ok(out)
}

/// Anomaly proportion sweep; each point trains its own twin.
pub fn anomaly_sweep(cfg: &RunConfig) -> Result<Vec<SweepRow>> {
    let mut out = Vec::new();
    for (k, &p) in cfg.benchmark.anomaly_p.iter().enumerate() {
        let noise = NoiseSpec { anomaly_p: p, ..cfg.noise.clone() };
        let ev = run_study(&with_noise(cfg, noise, 1000 + k as u64), &[QptMethod::Std, QptMethod::Em, QptMethod::Ml])?;
        out.extend(sweep_rows("anomaly_p", p, 0.0, &ev.bundle)?);
    }
    Ok(out)
}

/// `[noise]` with a fixed split. Coherent errors go where incoherent ones
/// do: only measurement gates when `λ_sp = 0`, only preparation gates when
/// `λ_m = 0`.
pub fn biased_noise(base: &NoiseSpec, lambda_sp: f64, lambda_m: f64) -> NoiseSpec {
    let coherent_targets = match (lambda_sp > 0.0, lambda_m > 0.0) {
        (false, true) => CoherentTargets::Meas,
        (true, false) => CoherentTargets::Prep,
        _ => CoherentTargets::Both,
    };
    NoiseSpec {
        lambda1: lambda_sp + lambda_m,
        split: SplitMode::Fixed { lambda_sp, lambda_m },
        coherent_targets,
        ..base.clone()
    }
}

/// Fixed `(λ_sp, λ_m)` grid with `λ1 = λ_sp + λ_m`; points with `λ1 > 1` are skipped.
pub fn biased_grid(cfg: &RunConfig) -> Result<Vec<SweepRow>> {
    let mut out = Vec::new();
    let axis = &cfg.benchmark.biased_axis;
    for (i, &sp) in axis.iter().enumerate() {
        for (j, &m) in axis.iter().enumerate() {
            if sp + m > 1.0 {
                continue;
            }
            let noise = biased_noise(&cfg.noise, sp, m);
            let stream = 2000 + (i * axis.len() + j) as u64;
            let ev = run_study(&with_noise(cfg, noise, stream), &[QptMethod::Std, QptMethod::Em])?;
            out.extend(sweep_rows("biased", sp, m, &ev.bundle)?);
        }
    }
    Ok(out)
}

/// Repeated tomography of the X gate; std, em and ml fidelity distributions
/// and their W1 distances to the reference.
pub fn w1_comparison(cfg: &RunConfig) -> Result<Evaluation> {
    let c = RunConfig {
        target: super::config::TargetKind::X,
        n_gates: cfg.benchmark.w1_runs,
        seed: named_seed(cfg.seed, "w1"),
        ..cfg.clone()
    };
    run_study(&c, &[QptMethod::Std, QptMethod::Em, QptMethod::Ml])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::experiment::DatasetTag;
    use crate::twin::{TrainOptions, VaeConfig};

    fn small() -> RunConfig {
        let mut cfg = RunConfig {
            n_gates: 4,
            n_error_matrices: 8,
            noise: NoiseSpec::even(0.05),
            seed: 11,
            ..RunConfig::default()
        };
        cfg.twin.vae = VaeConfig { hidden: vec![8, 6], ..VaeConfig::default() };
        cfg.twin.training = TrainOptions { epochs: 5, batch_size: 4, learning_rate: 1e-3 };
        cfg.twin.n_twins = 3;
        cfg
    }

    #[test]
    fn gate_runs_share_spam_with_their_identity_run() {
        let cfg = RunConfig { n_gates: 5, n_error_matrices: 2, ..small() };
        let exp = simulate_experiment(&cfg).unwrap();
        assert_eq!(exp.identity.len(), 2);
        assert_eq!(exp.gates.len(), 5);
        assert_eq!(exp.gates[3].identity_index, 1);
        assert!(exp.gates.iter().all(|g| g.data.tag == DatasetTag::GateRun));
    }

    #[test]
    fn evaluation_is_deterministic_and_complete() {
        let cfg = small();
        let methods = [QptMethod::Std, QptMethod::Em, QptMethod::Ml];
        let a = run_study(&cfg, &methods).unwrap();
        let b = run_study(&cfg, &methods).unwrap();
        assert_eq!(a.bundle.hash(), b.bundle.hash());
        assert_eq!(a.bundle.rows.len(), cfg.n_gates * methods.len());
        assert_eq!(a.ml_twin_fidelities[0].len(), cfg.twin.n_twins);
        assert_eq!(a.estimates.len(), 2);
        let other = run_study(&RunConfig { seed: 12, ..cfg }, &methods).unwrap();
        assert_ne!(a.bundle.hash(), other.bundle.hash());
    }

    #[test]
    fn ml_without_model_is_rejected() {
        let cfg = small();
        let exp = simulate_experiment(&cfg).unwrap();
        assert!(evaluate(&cfg, &exp, &[QptMethod::Ml], None).is_err());
        assert!(evaluate(&cfg, &exp, &[QptMethod::Lsgst], None).is_err());
        assert!(evaluate(&cfg, &exp, &[], None).is_err());
    }

    #[test]
    fn sweeps_produce_one_row_per_point_and_method() {
        let mut cfg = small();
        cfg.benchmark.lambda_tot = vec![0.0, 0.05];
        cfg.benchmark.biased_axis = vec![0.0, 0.1];
        assert_eq!(noise_grid(&cfg).unwrap().len(), 4);
        assert_eq!(biased_grid(&cfg).unwrap().len(), 8);
    }

    #[test]
    fn biased_noise_follows_the_noisy_side() {
        let base = NoiseSpec::even(0.1);
        assert_eq!(biased_noise(&base, 0.0, 0.1).coherent_targets, CoherentTargets::Meas);
        assert_eq!(biased_noise(&base, 0.1, 0.0).coherent_targets, CoherentTargets::Prep);
        let both = biased_noise(&base, 0.05, 0.05);
        assert_eq!(both.coherent_targets, CoherentTargets::Both);
        both.validate().unwrap();
    }
}
