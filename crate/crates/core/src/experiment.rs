//! The 12^N tomography circuit family and noisy outcome simulation.
//!
//! Index conventions used throughout the crate:
//!
//! * preparation index `i`: base-4 digits over qubits (qubit 0 most
//!   significant) selecting `{I, Rx(−π/2), Ry(−π/2), X}`;
//! * rotation index `r`: base-3 digits selecting `{I, Rx(π/2), Ry(π/2)}`;
//! * outcome `b`: bitstring with qubit 0 as the most significant bit;
//! * effect index `μ = r · 2^N + b`.

use rand::seq::SliceRandom;
use rand::Rng as _;
use rand_distr::{Binomial, Distribution};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{QptError, Result};
use crate::noise::{anomaly_chi, build_spam, NoiseSpec, ProbeGate, ProbeRole, SpamChannels};
use crate::quantum::channel::{apply_chi, apply_chi_adjoint, MeasOperator, ProcessMatrix, QuantumState};
use crate::quantum::matrix::{kron, trace_of_product, ComplexMatrix};
use crate::quantum::pauli::MAX_QUBITS;
use crate::seed::{child_seed, rng_from_seed, Rng};

pub fn digits(mut k: usize, base: usize, len: usize) -> Vec<usize> {
    let mut d = vec![0; len];
    for q in (0..len).rev() {
        d[q] = k % base;
        k /= base;
    }
    d
}

pub fn bitstring(b: usize, n_qubits: usize) -> String {
    digits(b, 2, n_qubits).iter().map(|&x| if x == 1 { '1' } else { '0' }).collect()
}

fn check_qubits(n_qubits: usize) -> Result<()> {
    if n_qubits == 0 || n_qubits > MAX_QUBITS {
        return Err(QptError::UnsupportedSize(format!(
            "n_qubits must be in 1..={MAX_QUBITS}, got {n_qubits}"
        )));
    }
    Ok(())
}

/// States and POVM effects probing a process. The ideal set uses pure
/// states and projective effects; mitigated sets carry estimated probes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProbeSet {
    pub n_qubits: usize,
    pub prep_labels: Vec<String>,
    pub meas_labels: Vec<String>,
    /// `4^N` input states indexed by preparation index.
    pub states: Vec<QuantumState>,
    /// `3^N · 2^N` effects indexed by `μ = r · 2^N + b`.
    pub povms: Vec<MeasOperator>,
}

impl ProbeSet {
    pub fn n_preps(&self) -> usize {
        self.states.len()
    }

    pub fn n_rotations(&self) -> usize {
        self.meas_labels.len()
    }

    pub fn n_outcomes(&self) -> usize {
        1 << self.n_qubits
    }

    pub fn n_effects(&self) -> usize {
        self.povms.len()
    }

    /// Effects of measurement-rotation group `r`.
    pub fn group(&self, r: usize) -> &[MeasOperator] {
        let k = self.n_outcomes();
        &self.povms[r * k..(r + 1) * k]
    }

    /// Same labels, new states and effects.
    pub fn with_probes(&self, states: Vec<QuantumState>, povms: Vec<MeasOperator>) -> Result<ProbeSet> {
        if states.len() != self.states.len() || povms.len() != self.povms.len() {
            return Err(QptError::Shape("probe counts differ from the template".into()));
        }
        Ok(ProbeSet { states, povms, ..self.clone() })
    }
}

fn tensor(ops: impl Iterator<Item = ComplexMatrix>) -> ComplexMatrix {
    ops.reduce(|acc, m| kron(&acc, &m)).expect("at least one qubit")
}

fn labels(gates: &[ProbeGate], base: usize, n_qubits: usize) -> Vec<String> {
    let count = base.pow(n_qubits as u32);
    (0..count)
        .map(|k| {
            digits(k, base, n_qubits)
                .iter()
                .map(|&g| gates[g].label())
                .collect::<Vec<_>>()
                .join("⊗")
        })
        .collect()
}

fn ground(dim: usize) -> ComplexMatrix {
    let mut g = ComplexMatrix::zeros(dim, dim);
    g[(0, 0)] = crate::quantum::matrix::ONE;
    g
}

fn projector(b: usize, dim: usize) -> ComplexMatrix {
    let mut p = ComplexMatrix::zeros(dim, dim);
    p[(b, b)] = crate::quantum::matrix::ONE;
    p
}

/// Preparation unitary `U1` for index `i` with the given per-qubit gate map.
fn prep_unitary(i: usize, n_qubits: usize, gate: impl Fn(usize, ProbeGate) -> ComplexMatrix) -> ComplexMatrix {
    tensor(digits(i, 4, n_qubits).into_iter().enumerate().map(|(q, g)| gate(q, ProbeGate::PREP[g])))
}

fn meas_unitary(r: usize, n_qubits: usize, gate: impl Fn(usize, ProbeGate) -> ComplexMatrix) -> ComplexMatrix {
    tensor(digits(r, 3, n_qubits).into_iter().enumerate().map(|(q, g)| gate(q, ProbeGate::MEAS[g])))
}

fn build_probes(
    n_qubits: usize,
    prep_gate: impl Fn(usize, ProbeGate) -> ComplexMatrix,
    meas_gate: impl Fn(usize, ProbeGate) -> ComplexMatrix,
    prep_channel: impl Fn(&ComplexMatrix) -> ComplexMatrix,
    meas_channel: impl Fn(&ComplexMatrix) -> ComplexMatrix,
) -> Result<ProbeSet> {
    check_qubits(n_qubits)?;
    let dim = 1 << n_qubits;
    let g = ground(dim);
    let states = (0..4usize.pow(n_qubits as u32))
        .map(|i| {
            let u = prep_unitary(i, n_qubits, &prep_gate);
            QuantumState::new(n_qubits, prep_channel(&(&u * &g * u.adjoint())))
        })
        .collect::<Result<Vec<_>>>()?;
    let mut povms = Vec::with_capacity(6usize.pow(n_qubits as u32));
    for r in 0..3usize.pow(n_qubits as u32) {
        let u = meas_unitary(r, n_qubits, &meas_gate);
        for b in 0..dim {
            let m = u.adjoint() * projector(b, dim) * &u;
            povms.push(MeasOperator::new(n_qubits, meas_channel(&m), bitstring(b, n_qubits))?);
        }
    }
    Ok(ProbeSet {
        n_qubits,
        prep_labels: labels(&ProbeGate::PREP, 4, n_qubits),
        meas_labels: labels(&ProbeGate::MEAS, 3, n_qubits),
        states,
        povms,
    })
}

/// Ideal probes: `ρ_i = U1 |0…0⟩⟨0…0| U1†`, `M = U2† |b⟩⟨b| U2`.
pub fn ideal_probes(n_qubits: usize) -> Result<ProbeSet> {
    build_probes(
        n_qubits,
        |_, g| g.ideal_unitary(),
        |_, g| g.ideal_unitary(),
        |m| m.clone(),
        |m| m.clone(),
    )
}

/// Probes as they actually act in a run with the given SPAM realisation:
/// `ρ̃_i = ℰ_sp(U1' ρ0 U1'†)` and `M̃ = ℰ_m†(U2'† |b⟩⟨b| U2')`.
pub fn dressed_probes(spam: &SpamChannels) -> Result<ProbeSet> {
    build_probes(
        spam.n_qubits,
        |q, g| spam.probe_unitary(q, g, ProbeRole::Prep),
        |q, g| spam.probe_unitary(q, g, ProbeRole::Meas),
        |m| apply_chi(&spam.e_sp, m),
        |m| apply_chi_adjoint(&spam.e_m, m),
    )
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DatasetTag {
    GateRun,
    IdentityRun,
    Anomaly,
}

impl DatasetTag {
    pub fn as_str(self) -> &'static str {
        match self {
            DatasetTag::GateRun => "gate-run",
            DatasetTag::IdentityRun => "identity-run",
            DatasetTag::Anomaly => "anomaly",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetRow {
    pub prep: usize,
    pub rot: usize,
    pub outcome: String,
    pub count: u64,
    pub prob: f64,
}

/// Outcome table of one tomography run over all 12^N circuits.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TomographyDataset {
    pub n_qubits: usize,
    /// Shots per circuit; `0` marks exact probabilities.
    pub shots: u64,
    pub seed: u64,
    pub tag: DatasetTag,
    pub rows: Vec<DatasetRow>,
}

impl TomographyDataset {
    pub fn n_circuits(&self) -> usize {
        12usize.pow(self.n_qubits as u32)
    }

    /// Estimated probabilities ordered by `(prep, μ)`.
    pub fn probabilities(&self) -> Vec<f64> {
        self.rows.iter().map(|r| r.prob).collect()
    }

    /// Structural checks: row order, counts and normalization.
    pub fn validate(&self) -> Result<()> {
        check_qubits(self.n_qubits)?;
        let k = 1usize << self.n_qubits;
        let expected = self.n_circuits() * k;
        if self.rows.len() != expected {
            return Err(QptError::Shape(format!("dataset has {} rows, expected {expected}", self.rows.len())));
        }
        let n_rot = 3usize.pow(self.n_qubits as u32);
        for (idx, row) in self.rows.iter().enumerate() {
            let (circuit, b) = (idx / k, idx % k);
            let (prep, rot) = (circuit / n_rot, circuit % n_rot);
            if row.prep != prep || row.rot != rot || row.outcome != bitstring(b, self.n_qubits) {
                return Err(QptError::Shape(format!("row {idx} out of canonical order")));
            }
            if !row.prob.is_finite() || row.prob < -1e-12 || row.prob > 1.0 + 1e-12 {
                return Err(QptError::Validation(format!("row {idx} probability {} invalid", row.prob)));
            }
        }
        for circuit in self.rows.chunks(k) {
            let total: u64 = circuit.iter().map(|r| r.count).sum();
            if total != self.shots {
                return Err(QptError::Validation(format!("circuit counts sum to {total}, expected {}", self.shots)));
            }
            let p: f64 = circuit.iter().map(|r| r.prob).sum();
            if (p - 1.0).abs() > 1e-9 {
                return Err(QptError::Validation(format!("circuit probabilities sum to {p}")));
            }
        }
        Ok(())
    }
}

fn outcome_distribution(state: &ComplexMatrix, effects: &[MeasOperator]) -> Result<Vec<f64>> {
    let mut p: Vec<f64> = effects.iter().map(|m| trace_of_product(m.m(), state).re).collect();
    for &x in &p {
        if x < -1e-12 {
            return Err(QptError::Consistency(format!("negative outcome probability {x:e}")));
        }
    }
    for x in p.iter_mut() {
        *x = x.max(0.0);
    }
    let total: f64 = p.iter().sum();
    if total <= 0.0 {
        return Err(QptError::Consistency("outcome distribution sums to zero".into()));
    }
    for x in p.iter_mut() {
        *x /= total;
    }
    Ok(p)
}

/// Multinomial draw via sequential conditional binomials.
pub fn multinomial(shots: u64, probs: &[f64], rng: &mut Rng) -> Vec<u64> {
    let mut counts = vec![0; probs.len()];
    let mut remaining = shots;
    let mut mass = 1.0;
    for (k, &p) in probs.iter().enumerate() {
        if remaining == 0 {
            break;
        }
        if k == probs.len() - 1 {
            counts[k] = remaining;
            break;
        }
        let q = if mass > 0.0 { (p / mass).clamp(0.0, 1.0) } else { 0.0 };
        let draw = Binomial::new(remaining, q).expect("valid binomial").sample(rng);
        counts[k] = draw;
        remaining -= draw;
        mass -= p;
    }
    counts
}

/// Simulate every circuit of a tomography run of `gate` under `spam`.
/// `shots = 0` returns exact probabilities.
pub fn simulate_qpt(gate: &ProcessMatrix, spam: &SpamChannels, shots: u64, rng: &mut Rng) -> Result<TomographyDataset> {
    if gate.n_qubits() != spam.n_qubits {
        return Err(QptError::Shape(format!(
            "gate acts on {} qubit(s), SPAM channels on {}",
            gate.n_qubits(),
            spam.n_qubits
        )));
    }
    let n = gate.n_qubits();
    let k = 1usize << n;
    let seed = rng.random::<u64>();
    let probes = dressed_probes(spam)?;
    let n_rot = probes.n_rotations();
    let mut rows = Vec::with_capacity(probes.n_preps() * probes.n_effects());
    let per_shot = spam.per_shot() && shots > 0;
    for (i, rho) in probes.states.iter().enumerate() {
        let evolved = apply_chi(gate, rho.rho());
        for r in 0..n_rot {
            let exact = outcome_distribution(&evolved, probes.group(r))?;
            let counts = if per_shot {
                per_shot_counts(gate, spam, i, r, shots, rng)?
            } else if shots > 0 {
                multinomial(shots, &exact, rng)
            } else {
                vec![0; k]
            };
            for b in 0..k {
                let prob = if shots > 0 { counts[b] as f64 / shots as f64 } else { exact[b] };
                rows.push(DatasetRow { prep: i, rot: r, outcome: bitstring(b, n), count: counts[b], prob });
            }
        }
    }
    Ok(TomographyDataset { n_qubits: n, shots, seed, tag: DatasetTag::GateRun, rows })
}

fn per_shot_counts(
    gate: &ProcessMatrix,
    spam: &SpamChannels,
    prep: usize,
    rot: usize,
    shots: u64,
    rng: &mut Rng,
) -> Result<Vec<u64>> {
    let n = spam.n_qubits;
    let dim = 1 << n;
    let g = ground(dim);
    let mut counts = vec![0u64; dim];
    for _ in 0..shots {
        let u1 = tensor(
            digits(prep, 4, n)
                .into_iter()
                .map(|d| spam.resampled_probe_unitary(ProbeGate::PREP[d], ProbeRole::Prep, rng)),
        );
        let u2 = tensor(
            digits(rot, 3, n)
                .into_iter()
                .map(|d| spam.resampled_probe_unitary(ProbeGate::MEAS[d], ProbeRole::Meas, rng)),
        );
        let rho = apply_chi(&spam.e_sp, &(&u1 * &g * u1.adjoint()));
        let out = apply_chi(&spam.e_m, &apply_chi(gate, &rho));
        let rotated = &u2 * out * u2.adjoint();
        let mut u: f64 = rng.random();
        let mut pick = dim - 1;
        for b in 0..dim {
            let p = rotated[(b, b)].re.max(0.0);
            if u < p {
                pick = b;
                break;
            }
            u -= p;
        }
        counts[pick] += 1;
    }
    Ok(counts)
}

/// One identity-process run together with the SPAM realisation behind it.
#[derive(Debug, Clone)]
pub struct IdentityRun {
    pub dataset: TomographyDataset,
    pub spam: SpamChannels,
}

/// Exact anomaly count for a batch.
pub fn anomaly_count(count: usize, anomaly_p: f64) -> usize {
    ((count as f64) * anomaly_p).round() as usize
}

/// `count` independent identity runs with fresh SPAM each; a proportion
/// `spec.anomaly_p` of them, at uniformly random positions, is replaced by
/// runs of a random CPTP anomaly process. Runs are generated in parallel
/// from per-run child seeds.
pub fn collect_error_runs(
    count: usize,
    spec: &NoiseSpec,
    n_qubits: usize,
    shots: u64,
    rng: &mut Rng,
) -> Result<Vec<IdentityRun>> {
    if count == 0 {
        return Err(QptError::Validation("error-matrix batch size must be at least 1".into()));
    }
    spec.validate()?;
    let base: u64 = rng.random();
    let mut flags = vec![false; count];
    let n_anom = anomaly_count(count, spec.anomaly_p);
    let mut positions: Vec<usize> = (0..count).collect();
    positions.shuffle(rng);
    for &p in positions.iter().take(n_anom) {
        flags[p] = true;
    }
    (0..count)
        .into_par_iter()
        .map(|k| {
            let mut run_rng = rng_from_seed(child_seed(base, k as u64));
            let spam = build_spam(spec, n_qubits, &mut run_rng)?;
            let (process, tag) = if flags[k] {
                (anomaly_chi(n_qubits, &mut run_rng)?, DatasetTag::Anomaly)
            } else {
                (ProcessMatrix::identity(n_qubits), DatasetTag::IdentityRun)
            };
            let mut dataset = simulate_qpt(&process, &spam, shots, &mut run_rng)?;
            dataset.tag = tag;
            Ok(IdentityRun { dataset, spam })
        })
        .collect()
}

pub fn collect_error_matrices(
    count: usize,
    spec: &NoiseSpec,
    n_qubits: usize,
    shots: u64,
    rng: &mut Rng,
) -> Result<Vec<TomographyDataset>> {
    Ok(collect_error_runs(count, spec, n_qubits, shots, rng)?
        .into_iter()
        .map(|r| r.dataset)
        .collect())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum QptMethod {
    Std,
    Em,
    Ml,
    Lsgst,
}

impl QptMethod {
    pub fn name(self) -> &'static str {
        match self {
            QptMethod::Std => "std-QPT",
            QptMethod::Em => "EM-QPT",
            QptMethod::Ml => "ML-QPT",
            QptMethod::Lsgst => "LSGST",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct CircuitCount {
    pub circuits: u64,
    /// The true count is larger; only a lower bound is known.
    pub lower_bound: bool,
}

/// Experimental circuit count for one characterization.
pub fn circuit_count(method: QptMethod, n_qubits: usize, n_x: u64) -> Result<CircuitCount> {
    check_qubits(n_qubits)?;
    let base = 12u64.pow(n_qubits as u32);
    let exact = |circuits| Ok(CircuitCount { circuits, lower_bound: false });
    match method {
        QptMethod::Std => exact(base),
        QptMethod::Em => exact(2 * base),
        QptMethod::Ml => exact((n_x + 1) * base),
        // pyGSTi-generated counts: 2904 + 12 for one qubit, 15925 + 144 (lower bound) for two
        QptMethod::Lsgst => match n_qubits {
            1 => exact(2916),
            2 => Ok(CircuitCount { circuits: 16069, lower_bound: true }),
            _ => Err(QptError::UnsupportedSize(format!("LSGST count unknown for {n_qubits} qubits"))),
        },
    }
}
