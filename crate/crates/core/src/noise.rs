//! SPAM error channels, random target processes and anomaly χ matrices.

use std::f64::consts::PI;

use rand::Rng as _;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{QptError, Result};
use crate::quantum::channel::{cached_basis, kraus_to_chi, qubits_for_dim, ProcessMatrix};
use crate::quantum::matrix::{c, from_rows, hermitian_eigen, from_eigen, ComplexMatrix};
use crate::seed::Rng;

/// How the incoherent budget `λ1` is split between preparation and measurement.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SplitMode {
    /// `λ_sp ~ U(0, λ1)`, `λ_m = λ1 − λ_sp`.
    Random,
    Fixed { lambda_sp: f64, lambda_m: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CoherentMode {
    /// `θ' = θ0 + Δθ`, `Δθ ~ U(−λ2 π, λ2 π)`.
    AdditiveShift,
    /// `θ' = θ0 (1 + r)`, `r ~ U(−λ2, λ2)`.
    AmplitudeJitter,
}

/// Which probe gates receive coherent errors.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CoherentTargets {
    Prep,
    Meas,
    Both,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NoiseSpec {
    /// Incoherent (depolarizing) budget.
    pub lambda1: f64,
    /// Coherent half-width: units of π in additive mode, a fraction in jitter mode.
    pub lambda2: f64,
    #[serde(default = "default_split")]
    pub split: SplitMode,
    #[serde(default = "default_mode")]
    pub coherent_mode: CoherentMode,
    #[serde(default = "default_targets")]
    pub coherent_targets: CoherentTargets,
    /// Resample the jitter offset for every shot (amplitude-jitter mode only).
    #[serde(default)]
    pub jitter_per_shot: bool,
    #[serde(default)]
    pub anomaly_p: f64,
    #[serde(default)]
    pub seed: u64,
}

fn default_split() -> SplitMode {
    SplitMode::Random
}
fn default_mode() -> CoherentMode {
    CoherentMode::AdditiveShift
}
fn default_targets() -> CoherentTargets {
    CoherentTargets::Both
}

impl Default for NoiseSpec {
    fn default() -> Self {
        NoiseSpec::noiseless()
    }
}

impl NoiseSpec {
    pub fn noiseless() -> Self {
        NoiseSpec {
            lambda1: 0.0,
            lambda2: 0.0,
            split: SplitMode::Random,
            coherent_mode: CoherentMode::AdditiveShift,
            coherent_targets: CoherentTargets::Both,
            jitter_per_shot: false,
            anomaly_p: 0.0,
            seed: 0,
        }
    }

    /// Evenly mixed regime `λ1 = λ2 = λ_tot`.
    pub fn even(lambda_tot: f64) -> Self {
        NoiseSpec { lambda1: lambda_tot, lambda2: lambda_tot, ..NoiseSpec::noiseless() }
    }

    pub fn lambda_tot(&self) -> f64 {
        (self.lambda1 + self.lambda2) / 2.0
    }

    pub fn validate(&self) -> Result<()> {
        let unit = |field: &str, v: f64| -> Result<()> {
            if !(0.0..=1.0).contains(&v) || !v.is_finite() {
                return Err(QptError::Config {
                    field: field.into(),
                    message: format!("must lie in [0, 1], got {v}"),
                });
            }
            Ok(())
        };
        unit("noise.lambda1", self.lambda1)?;
        unit("noise.lambda2", self.lambda2)?;
        unit("noise.anomaly_p", self.anomaly_p)?;
        if let SplitMode::Fixed { lambda_sp, lambda_m } = self.split {
            unit("noise.split.lambda_sp", lambda_sp)?;
            unit("noise.split.lambda_m", lambda_m)?;
            if (lambda_sp + lambda_m - self.lambda1).abs() > 1e-12 {
                return Err(QptError::Config {
                    field: "noise.split".into(),
                    message: format!(
                        "lambda_sp + lambda_m = {} must equal lambda1 = {}",
                        lambda_sp + lambda_m,
                        self.lambda1
                    ),
                });
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Axis {
    X,
    Y,
    Z,
}

/// `R_axis(θ) = exp(−i θ σ_axis / 2)`.
pub fn rotation(axis: Axis, theta: f64) -> ComplexMatrix {
    let (co, si) = ((theta / 2.0).cos(), (theta / 2.0).sin());
    match axis {
        Axis::X => from_rows(2, 2, &[c(co, 0.0), c(0.0, -si), c(0.0, -si), c(co, 0.0)]),
        Axis::Y => from_rows(2, 2, &[c(co, 0.0), c(-si, 0.0), c(si, 0.0), c(co, 0.0)]),
        Axis::Z => from_rows(2, 2, &[c(co, -si), c(0.0, 0.0), c(0.0, 0.0), c(co, si)]),
    }
}

/// Single-qubit gates used by the tomography probes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum ProbeGate {
    #[serde(rename = "I")]
    Idle,
    #[serde(rename = "Rx(-pi/2)")]
    RxMinusHalfPi,
    #[serde(rename = "Ry(-pi/2)")]
    RyMinusHalfPi,
    #[serde(rename = "X")]
    X,
    #[serde(rename = "Rx(pi/2)")]
    RxHalfPi,
    #[serde(rename = "Ry(pi/2)")]
    RyHalfPi,
}

impl ProbeGate {
    pub const PREP: [ProbeGate; 4] =
        [ProbeGate::Idle, ProbeGate::RxMinusHalfPi, ProbeGate::RyMinusHalfPi, ProbeGate::X];
    pub const MEAS: [ProbeGate; 3] = [ProbeGate::Idle, ProbeGate::RxHalfPi, ProbeGate::RyHalfPi];
    /// Gates that are physical rotations and can carry a coherent offset.
    pub const ROTATIONS: [ProbeGate; 5] = [
        ProbeGate::RxMinusHalfPi,
        ProbeGate::RyMinusHalfPi,
        ProbeGate::X,
        ProbeGate::RxHalfPi,
        ProbeGate::RyHalfPi,
    ];

    /// `(axis, θ0)`; `None` for the idle gate.
    pub fn rotation(self) -> Option<(Axis, f64)> {
        match self {
            ProbeGate::Idle => None,
            ProbeGate::RxMinusHalfPi => Some((Axis::X, -PI / 2.0)),
            ProbeGate::RyMinusHalfPi => Some((Axis::Y, -PI / 2.0)),
            ProbeGate::X => Some((Axis::X, PI)),
            ProbeGate::RxHalfPi => Some((Axis::X, PI / 2.0)),
            ProbeGate::RyHalfPi => Some((Axis::Y, PI / 2.0)),
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            ProbeGate::Idle => "I",
            ProbeGate::RxMinusHalfPi => "Rx(-pi/2)",
            ProbeGate::RyMinusHalfPi => "Ry(-pi/2)",
            ProbeGate::X => "X",
            ProbeGate::RxHalfPi => "Rx(pi/2)",
            ProbeGate::RyHalfPi => "Ry(pi/2)",
        }
    }

    pub fn ideal_unitary(self) -> ComplexMatrix {
        match self.rotation() {
            None => ComplexMatrix::identity(2, 2),
            Some((axis, theta)) => rotation(axis, theta),
        }
    }
}

fn sample_offset(mode: CoherentMode, lambda2: f64, rng: &mut Rng) -> f64 {
    if lambda2 == 0.0 {
        // keep the stream aligned with the non-zero case
        let _: f64 = rng.random();
        return 0.0;
    }
    let u: f64 = rng.random_range(-1.0..1.0);
    match mode {
        CoherentMode::AdditiveShift => u * lambda2 * PI,
        CoherentMode::AmplitudeJitter => u * lambda2,
    }
}

fn perturbed_angle(mode: CoherentMode, theta0: f64, offset: f64) -> f64 {
    match mode {
        CoherentMode::AdditiveShift => theta0 + offset,
        CoherentMode::AmplitudeJitter => theta0 * (1.0 + offset),
    }
}

/// Perturbed rotation `R_axis(θ')` with a freshly sampled coherent offset.
pub fn coherent_rotation_error(axis: Axis, theta0: f64, spec: &NoiseSpec, rng: &mut Rng) -> ComplexMatrix {
    let offset = sample_offset(spec.coherent_mode, spec.lambda2, rng);
    rotation(axis, perturbed_angle(spec.coherent_mode, theta0, offset))
}

/// One sampled coherent offset (`Δθ` or `r`) for a gate on a qubit.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CoherentOffset {
    pub qubit: usize,
    pub gate: ProbeGate,
    pub offset: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ProbeRole {
    Prep,
    Meas,
}

/// Sampled SPAM error realisation for one tomography run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpamChannels {
    pub n_qubits: usize,
    pub lambda_sp: f64,
    pub lambda_m: f64,
    pub e_sp: ProcessMatrix,
    pub e_m: ProcessMatrix,
    pub coherent_mode: CoherentMode,
    pub coherent_targets: CoherentTargets,
    pub lambda2: f64,
    pub jitter_per_shot: bool,
    pub per_gate_coherent: Vec<CoherentOffset>,
}

impl SpamChannels {
    /// Noise-free channels.
    pub fn ideal(n_qubits: usize) -> Self {
        SpamChannels {
            n_qubits,
            lambda_sp: 0.0,
            lambda_m: 0.0,
            e_sp: ProcessMatrix::identity(n_qubits),
            e_m: ProcessMatrix::identity(n_qubits),
            coherent_mode: CoherentMode::AdditiveShift,
            coherent_targets: CoherentTargets::Both,
            lambda2: 0.0,
            jitter_per_shot: false,
            per_gate_coherent: Vec::new(),
        }
    }

    fn applies_to(&self, role: ProbeRole) -> bool {
        matches!(
            (self.coherent_targets, role),
            (CoherentTargets::Both, _)
                | (CoherentTargets::Prep, ProbeRole::Prep)
                | (CoherentTargets::Meas, ProbeRole::Meas)
        )
    }

    pub fn offset(&self, qubit: usize, gate: ProbeGate) -> f64 {
        self.per_gate_coherent
            .iter()
            .find(|o| o.qubit == qubit && o.gate == gate)
            .map_or(0.0, |o| o.offset)
    }

    /// Probe gate as actually executed in this run.
    pub fn probe_unitary(&self, qubit: usize, gate: ProbeGate, role: ProbeRole) -> ComplexMatrix {
        match gate.rotation() {
            None => ComplexMatrix::identity(2, 2),
            Some((axis, theta0)) if self.applies_to(role) => {
                rotation(axis, perturbed_angle(self.coherent_mode, theta0, self.offset(qubit, gate)))
            }
            Some((axis, theta0)) => rotation(axis, theta0),
        }
    }

    /// Probe gate with a freshly drawn offset (per-shot jitter).
    pub fn resampled_probe_unitary(&self, gate: ProbeGate, role: ProbeRole, rng: &mut Rng) -> ComplexMatrix {
        match gate.rotation() {
            None => ComplexMatrix::identity(2, 2),
            Some((axis, theta0)) if self.applies_to(role) => {
                let off = sample_offset(self.coherent_mode, self.lambda2, rng);
                rotation(axis, perturbed_angle(self.coherent_mode, theta0, off))
            }
            Some((axis, theta0)) => rotation(axis, theta0),
        }
    }

    pub fn per_shot(&self) -> bool {
        self.jitter_per_shot && self.coherent_mode == CoherentMode::AmplitudeJitter && self.lambda2 > 0.0
    }
}

/// χ of `ρ ↦ (1 − λ) ρ + λ Tr(ρ) I / 2^N`.
pub fn depolarizing_chi(lambda: f64, n_qubits: usize) -> Result<ProcessMatrix> {
    if !(0.0..=1.0).contains(&lambda) {
        return Err(QptError::Validation(format!("depolarizing strength {lambda} outside [0, 1]")));
    }
    let basis = cached_basis(n_qubits)?;
    let n = basis.len();
    let mut chi = ComplexMatrix::zeros(n, n);
    let share = lambda / n as f64;
    chi[(0, 0)] = c(1.0 - lambda + share, 0.0);
    for k in 1..n {
        chi[(k, k)] = c(share, 0.0);
    }
    ProcessMatrix::new(n_qubits, chi)
}

/// Sample one SPAM realisation: depolarizing split plus coherent offsets for
/// every rotation gate on every qubit.
pub fn build_spam(spec: &NoiseSpec, n_qubits: usize, rng: &mut Rng) -> Result<SpamChannels> {
    spec.validate()?;
    let (lambda_sp, lambda_m) = match spec.split {
        SplitMode::Random => {
            let u: f64 = rng.random();
            let sp = u * spec.lambda1;
            (sp, spec.lambda1 - sp)
        }
        SplitMode::Fixed { lambda_sp, lambda_m } => (lambda_sp, lambda_m),
    };
    let mut per_gate_coherent = Vec::with_capacity(n_qubits * ProbeGate::ROTATIONS.len());
    for qubit in 0..n_qubits {
        for gate in ProbeGate::ROTATIONS {
            let offset = sample_offset(spec.coherent_mode, spec.lambda2, rng);
            per_gate_coherent.push(CoherentOffset { qubit, gate, offset });
        }
    }
    Ok(SpamChannels {
        n_qubits,
        lambda_sp,
        lambda_m,
        e_sp: depolarizing_chi(lambda_sp, n_qubits)?,
        e_m: depolarizing_chi(lambda_m.clamp(0.0, 1.0), n_qubits)?,
        coherent_mode: spec.coherent_mode,
        coherent_targets: spec.coherent_targets,
        lambda2: spec.lambda2,
        jitter_per_shot: spec.jitter_per_shot,
        per_gate_coherent,
    })
}

pub fn complex_gaussian(rng: &mut Rng) -> num_complex::Complex64 {
    let re: f64 = StandardNormal.sample(rng);
    let im: f64 = StandardNormal.sample(rng);
    c(re, im) / std::f64::consts::SQRT_2
}

/// Haar-random unitary via QR of a complex Ginibre matrix with the phases
/// of `diag(R)` moved into `Q`.
pub fn haar_random_unitary(dim: usize, rng: &mut Rng) -> Result<ComplexMatrix> {
    if ![2, 4, 8].contains(&dim) {
        return Err(QptError::UnsupportedSize(format!("Haar sampling supports dim 2, 4, 8; got {dim}")));
    }
    let z = ComplexMatrix::from_fn(dim, dim, |_, _| complex_gaussian(rng));
    let qr = z.qr();
    let (mut q, r) = qr.unpack();
    for k in 0..dim {
        let d = r[(k, k)];
        let phase = if d.norm() > 0.0 { d / d.norm() } else { c(1.0, 0.0) };
        let mut col = q.column_mut(k);
        col *= phase;
    }
    Ok(q)
}

const MAX_RETRIES: usize = 16;

/// Random CPTP channel with `kraus_rank` Kraus operators built from complex
/// Gaussian Pauli coefficients, normalized as `K_i = K'_i S^{-1/2}` with
/// `S = Σ K'_i† K'_i`.
pub fn random_cptp(n_qubits: usize, kraus_rank: usize, rng: &mut Rng) -> Result<ProcessMatrix> {
    let basis = cached_basis(n_qubits)?;
    let n = basis.len();
    if kraus_rank == 0 || kraus_rank > n {
        return Err(QptError::Validation(format!("kraus_rank must be in 1..={n}, got {kraus_rank}")));
    }
    let d = basis.dim();
    for _ in 0..MAX_RETRIES {
        let unnormalized: Vec<ComplexMatrix> = (0..kraus_rank)
            .map(|_| {
                let coeffs: Vec<_> = (0..n).map(|_| complex_gaussian(rng)).collect();
                basis.combine(&coeffs)
            })
            .collect();
        let s = unnormalized
            .iter()
            .fold(ComplexMatrix::zeros(d, d), |acc, k| acc + k.adjoint() * k);
        let (vals, vecs) = hermitian_eigen(&s);
        if vals[0] < 1e-10 * vals[d - 1].max(1e-300) {
            continue;
        }
        let inv_sqrt: Vec<f64> = vals.iter().map(|v| 1.0 / v.sqrt()).collect();
        let s_inv_sqrt = from_eigen(&inv_sqrt, &vecs);
        let kraus: Vec<ComplexMatrix> = unnormalized.iter().map(|k| k * &s_inv_sqrt).collect();
        return kraus_to_chi(&kraus);
    }
    Err(QptError::Consistency(format!(
        "Kraus normalizer singular after {MAX_RETRIES} attempts"
    )))
}

/// Anomaly event: a random CPTP χ with Kraus rank uniform in `[1, 4^N]`.
pub fn anomaly_chi(n_qubits: usize, rng: &mut Rng) -> Result<ProcessMatrix> {
    let n = 4usize.pow(n_qubits as u32);
    let rank = rng.random_range(1..=n);
    random_cptp(n_qubits, rank, rng)
}

/// Convenience: χ of a Haar-random N-qubit unitary gate.
pub fn haar_random_gate(n_qubits: usize, rng: &mut Rng) -> Result<ProcessMatrix> {
    let u = haar_random_unitary(1 << n_qubits, rng)?;
    crate::quantum::unitary_to_chi(&u)
}

pub fn n_qubits_of(u: &ComplexMatrix) -> Result<usize> {
    qubits_for_dim(u.nrows())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quantum::channel::{apply_chi, unitarity_residual};
    use crate::quantum::cptp::{chi_distance, is_cptp, CPTP_TOL};
    use crate::quantum::matrix::{frobenius, hermitian_eigenvalues, trace_of_product};
    use crate::quantum::pauli::pauli;
    use crate::seed::rng_from_seed;

    #[test]
    fn depolarizing_endpoints() {
        assert_eq!(depolarizing_chi(0.0, 1).unwrap(), ProcessMatrix::identity(1));
        let full = depolarizing_chi(1.0, 1).unwrap();
        for k in 0..4 {
            assert!((full.chi()[(k, k)].re - 0.25).abs() < 1e-15);
        }
        assert!(depolarizing_chi(1.5, 1).is_err());
    }

    #[test]
    fn depolarizing_half_on_plus_state() {
        let plus = from_rows(2, 2, &[c(0.5, 0.0), c(0.5, 0.0), c(0.5, 0.0), c(0.5, 0.0)]);
        let out = apply_chi(&depolarizing_chi(0.5, 1).unwrap(), &plus);
        assert!((trace_of_product(&pauli(1), &out).re - 0.5).abs() < 1e-14);
    }

    #[test]
    fn depolarizing_matches_closed_form_two_qubits() {
        let mut rng = rng_from_seed(3);
        let u = haar_random_unitary(4, &mut rng).unwrap();
        let mut rho = ComplexMatrix::zeros(4, 4);
        rho[(0, 0)] = c(1.0, 0.0);
        let rho = &u * rho * u.adjoint();
        let lam = 0.37;
        let out = apply_chi(&depolarizing_chi(lam, 2).unwrap(), &rho);
        let expect = rho.scale(1.0 - lam) + ComplexMatrix::identity(4, 4).scale(lam / 4.0);
        assert!(frobenius(&(out - expect)) < 1e-14);
    }

    #[test]
    fn zero_coherent_width_is_exact_rotation() {
        let mut rng = rng_from_seed(1);
        let spec = NoiseSpec::noiseless();
        let u = coherent_rotation_error(Axis::Y, 0.8, &spec, &mut rng);
        assert!(frobenius(&(u - rotation(Axis::Y, 0.8))) < 1e-15);
    }

    #[test]
    fn additive_shift_moments() {
        // Δθ ~ U(−π, π): E|Δθ| = π/2, sd(|Δθ|) = π/√12
        let mut rng = rng_from_seed(11);
        let draws = 100_000;
        let (mut sum_abs, mut sum) = (0.0, 0.0);
        for _ in 0..draws {
            let d = sample_offset(CoherentMode::AdditiveShift, 1.0, &mut rng);
            assert!(d.abs() <= PI);
            sum_abs += d.abs();
            sum += d;
        }
        let n = draws as f64;
        let se_abs = PI / 12f64.sqrt() / n.sqrt();
        assert!((sum_abs / n - PI / 2.0).abs() < 3.0 * se_abs);
        let se = PI / 3f64.sqrt() / n.sqrt();
        assert!((sum / n).abs() < 3.0 * se);
    }

    #[test]
    fn jitter_bounds() {
        let mut rng = rng_from_seed(2);
        let spec = NoiseSpec {
            lambda2: 0.1,
            coherent_mode: CoherentMode::AmplitudeJitter,
            ..NoiseSpec::noiseless()
        };
        for _ in 0..1000 {
            let off = sample_offset(spec.coherent_mode, spec.lambda2, &mut rng);
            let angle = perturbed_angle(spec.coherent_mode, PI, off);
            assert!((0.9 * PI..=1.1 * PI).contains(&angle));
        }
    }

    #[test]
    fn noiseless_spam_is_identity() {
        let mut rng = rng_from_seed(0);
        let s = build_spam(&NoiseSpec::noiseless(), 1, &mut rng).unwrap();
        assert_eq!(s.e_sp, ProcessMatrix::identity(1));
        assert_eq!(s.e_m, ProcessMatrix::identity(1));
        for g in ProbeGate::ROTATIONS {
            assert!(frobenius(&(s.probe_unitary(0, g, ProbeRole::Prep) - g.ideal_unitary())) < 1e-15);
        }
    }

    #[test]
    fn fixed_split_extreme() {
        let spec = NoiseSpec {
            lambda1: 0.1,
            split: SplitMode::Fixed { lambda_sp: 0.0, lambda_m: 0.1 },
            ..NoiseSpec::noiseless()
        };
        let s = build_spam(&spec, 1, &mut rng_from_seed(0)).unwrap();
        assert_eq!(s.e_sp, ProcessMatrix::identity(1));
        assert!((s.e_m.chi()[(0, 0)].re - (1.0 - 0.075)).abs() < 1e-15);
        let bad = NoiseSpec { split: SplitMode::Fixed { lambda_sp: 0.05, lambda_m: 0.1 }, ..spec };
        assert!(matches!(bad.validate(), Err(QptError::Config { .. })));
    }

    #[test]
    fn random_split_mean() {
        let spec = NoiseSpec { lambda1: 0.2, ..NoiseSpec::noiseless() };
        let mut rng = rng_from_seed(4);
        let n = 10_000;
        let mean = (0..n).map(|_| build_spam(&spec, 1, &mut rng).unwrap().lambda_sp).sum::<f64>() / n as f64;
        let se = 0.2 / 12f64.sqrt() / (n as f64).sqrt();
        assert!((mean - 0.1).abs() < 3.0 * se);
    }

    #[test]
    fn spam_is_seed_deterministic() {
        let spec = NoiseSpec::even(0.07);
        let a = build_spam(&spec, 2, &mut rng_from_seed(99)).unwrap();
        let b = build_spam(&spec, 2, &mut rng_from_seed(99)).unwrap();
        assert_eq!(a, b);
        assert!(is_cptp(&a.e_sp, CPTP_TOL).is_valid(CPTP_TOL));
        assert!(is_cptp(&a.e_m, CPTP_TOL).is_valid(CPTP_TOL));
    }

    #[test]
    fn haar_unitarity_and_first_moment() {
        let mut rng = rng_from_seed(8);
        for dim in [2, 4, 8] {
            let u = haar_random_unitary(dim, &mut rng).unwrap();
            assert!(unitarity_residual(&u) < 1e-12);
            assert!((u.determinant().norm() - 1.0).abs() < 1e-12);
        }
        // E|U_00|² = 1/dim, Var = (dim−1)/(dim²(dim+1))
        let dim = 4;
        let n = 10_000;
        let vals: Vec<f64> = (0..n).map(|_| haar_random_unitary(dim, &mut rng).unwrap()[(0, 0)].norm_sqr()).collect();
        let mean = vals.iter().sum::<f64>() / n as f64;
        let var = (dim as f64 - 1.0) / ((dim * dim) as f64 * (dim as f64 + 1.0));
        assert!((mean - 0.25).abs() < 3.0 * (var / n as f64).sqrt());
        assert!(haar_random_unitary(3, &mut rng).is_err());
    }

    #[test]
    fn random_cptp_properties() {
        let mut rng = rng_from_seed(21);
        for n_q in 1..=2 {
            let n = 4usize.pow(n_q as u32);
            for rank in [1, 2, n] {
                let chi = random_cptp(n_q, rank, &mut rng).unwrap();
                let r = is_cptp(&chi, CPTP_TOL);
                assert!((r.trace_re - 1.0).abs() < 1e-10 && r.tp_residual < 1e-10);
                assert!(r.is_valid(CPTP_TOL));
                let ev = hermitian_eigenvalues(chi.chi());
                let significant = ev.iter().filter(|&&v| v > 1e-9).count();
                if rank == 1 {
                    assert_eq!(significant, 1);
                }
                if rank == n {
                    assert_eq!(significant, n);
                }
            }
        }
        assert!(random_cptp(1, 5, &mut rng).is_err());
    }

    #[test]
    fn anomalies_are_valid_and_distinct() {
        let a = anomaly_chi(1, &mut rng_from_seed(1)).unwrap();
        let b = anomaly_chi(1, &mut rng_from_seed(2)).unwrap();
        assert!(is_cptp(&a, CPTP_TOL).is_valid(CPTP_TOL));
        assert!(chi_distance(&a, &b) > 0.1);
        // mean overlap with the identity channel stays far below one half
        let mut rng = rng_from_seed(3);
        let mean: f64 = (0..1000).map(|_| anomaly_chi(1, &mut rng).unwrap().chi()[(0, 0)].re).sum::<f64>() / 1000.0;
        assert!(mean < 0.5, "mean identity fidelity {mean}");
    }
}
