//! Process matrices, states, measurement effects and conversions between
//! unitary, Kraus and χ representations.

use std::sync::OnceLock;

use num_complex::Complex64;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use super::matrix::{
    dagger, ensure_square, frobenius, hermitian_eigen, identity, is_finite, trace, ComplexMatrix,
    MatrixJson, ZERO,
};
use super::pauli::{PauliBasis, MAX_QUBITS};
use crate::error::{QptError, Result};

/// Tolerance used when validating unitarity and trace preservation of inputs.
pub const INPUT_TOL: f64 = 1e-8;

static BASES: OnceLock<Vec<PauliBasis>> = OnceLock::new();

/// Shared Pauli basis for `n_qubits` (built once per process).
pub fn cached_basis(n_qubits: usize) -> Result<&'static PauliBasis> {
    if n_qubits == 0 || n_qubits > MAX_QUBITS {
        return Err(QptError::UnsupportedSize(format!(
            "n_qubits must be in 1..={MAX_QUBITS}, got {n_qubits}"
        )));
    }
    let all = BASES.get_or_init(|| {
        (1..=MAX_QUBITS)
            .map(|n| PauliBasis::new(n).expect("valid size"))
            .collect()
    });
    Ok(&all[n_qubits - 1])
}

/// Number of qubits for a Hilbert-space dimension `2^N`.
pub fn qubits_for_dim(dim: usize) -> Result<usize> {
    if dim < 2 || !dim.is_power_of_two() {
        return Err(QptError::Shape(format!("dimension {dim} is not 2^N")));
    }
    Ok(dim.trailing_zeros() as usize)
}

/// Number of qubits for a χ-matrix side length `4^N`.
pub fn qubits_for_chi_dim(n: usize) -> Result<usize> {
    let q = qubits_for_dim(n)?;
    if q % 2 != 0 {
        return Err(QptError::Shape(format!("χ dimension {n} is not 4^N")));
    }
    Ok(q / 2)
}

/// χ matrix of a channel in the Pauli basis:
/// `ℰ(ρ) = Σ_{αβ} χ_{αβ} E_α ρ E_β†`.
#[derive(Debug, Clone, PartialEq)]
pub struct ProcessMatrix {
    n_qubits: usize,
    chi: ComplexMatrix,
}

impl ProcessMatrix {
    pub fn new(n_qubits: usize, chi: ComplexMatrix) -> Result<Self> {
        let side = 4usize.pow(n_qubits as u32);
        if chi.nrows() != side || chi.ncols() != side {
            return Err(QptError::Shape(format!(
                "χ for {n_qubits} qubit(s) must be {side}x{side}, got {}x{}",
                chi.nrows(),
                chi.ncols()
            )));
        }
        if !is_finite(&chi) {
            return Err(QptError::NonFinite("χ entries".into()));
        }
        Ok(ProcessMatrix { n_qubits, chi })
    }

    /// The identity channel, `χ_{mn} = δ_{m0} δ_{n0}`.
    pub fn identity(n_qubits: usize) -> Self {
        let side = 4usize.pow(n_qubits as u32);
        let mut chi = ComplexMatrix::zeros(side, side);
        chi[(0, 0)] = Complex64::new(1.0, 0.0);
        ProcessMatrix { n_qubits, chi }
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn chi(&self) -> &ComplexMatrix {
        &self.chi
    }

    pub fn into_chi(self) -> ComplexMatrix {
        self.chi
    }

    pub fn side(&self) -> usize {
        self.chi.nrows()
    }

    pub fn trace(&self) -> Complex64 {
        trace(&self.chi)
    }

    pub fn basis(&self) -> &'static PauliBasis {
        cached_basis(self.n_qubits).expect("validated at construction")
    }
}

/// Density operator.
#[derive(Debug, Clone, PartialEq)]
pub struct QuantumState {
    n_qubits: usize,
    rho: ComplexMatrix,
}

impl QuantumState {
    pub fn new(n_qubits: usize, rho: ComplexMatrix) -> Result<Self> {
        check_operator_shape(n_qubits, &rho, "ρ")?;
        Ok(QuantumState { n_qubits, rho })
    }

    /// `|ψ⟩⟨ψ|` for a state vector given as a column matrix.
    pub fn pure(psi: &ComplexMatrix) -> Result<Self> {
        let n = qubits_for_dim(psi.nrows())?;
        QuantumState::new(n, psi * dagger(psi))
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn rho(&self) -> &ComplexMatrix {
        &self.rho
    }

    pub fn into_rho(self) -> ComplexMatrix {
        self.rho
    }
}

/// POVM effect with its outcome bitstring.
#[derive(Debug, Clone, PartialEq)]
pub struct MeasOperator {
    n_qubits: usize,
    m: ComplexMatrix,
    outcome_label: String,
}

impl MeasOperator {
    pub fn new(n_qubits: usize, m: ComplexMatrix, outcome_label: impl Into<String>) -> Result<Self> {
        check_operator_shape(n_qubits, &m, "M")?;
        Ok(MeasOperator { n_qubits, m, outcome_label: outcome_label.into() })
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn m(&self) -> &ComplexMatrix {
        &self.m
    }

    pub fn outcome_label(&self) -> &str {
        &self.outcome_label
    }
}

fn check_operator_shape(n_qubits: usize, op: &ComplexMatrix, what: &str) -> Result<()> {
    let d = 1usize << n_qubits;
    if op.nrows() != d || op.ncols() != d {
        return Err(QptError::Shape(format!(
            "{what} for {n_qubits} qubit(s) must be {d}x{d}, got {}x{}",
            op.nrows(),
            op.ncols()
        )));
    }
    if !is_finite(op) {
        return Err(QptError::NonFinite(format!("{what} entries")));
    }
    Ok(())
}

/// `||U†U − I||_F`.
pub fn unitarity_residual(u: &ComplexMatrix) -> f64 {
    frobenius(&(u.adjoint() * u - identity(u.nrows())))
}

/// χ of the unitary channel `ρ ↦ U ρ U†` (rank one).
pub fn unitary_to_chi(u: &ComplexMatrix) -> Result<ProcessMatrix> {
    let d = ensure_square(u, "unitary")?;
    let n = qubits_for_dim(d)?;
    let res = unitarity_residual(u);
    if res > INPUT_TOL {
        return Err(QptError::Validation(format!("matrix is not unitary (residual {res:e})")));
    }
    let basis = cached_basis(n)?;
    let coeffs = basis.coefficients(u);
    ProcessMatrix::new(n, outer(&coeffs))
}

fn outer(c: &[Complex64]) -> ComplexMatrix {
    ComplexMatrix::from_fn(c.len(), c.len(), |a, b| c[a] * c[b].conj())
}

/// `||Σ K_i† K_i − I||_F`.
pub fn kraus_tp_residual(kraus: &[ComplexMatrix]) -> f64 {
    let d = kraus[0].nrows();
    let sum = kraus
        .iter()
        .fold(ComplexMatrix::zeros(d, d), |acc, k| acc + k.adjoint() * k);
    frobenius(&(sum - identity(d)))
}

/// χ from a Kraus set: `χ_{αβ} = Σ_i c_α^{(i)} (c_β^{(i)})*`.
pub fn kraus_to_chi(kraus: &[ComplexMatrix]) -> Result<ProcessMatrix> {
    if kraus.is_empty() {
        return Err(QptError::Empty("Kraus set".into()));
    }
    let d = ensure_square(&kraus[0], "Kraus operator")?;
    if kraus.iter().any(|k| k.nrows() != d || k.ncols() != d) {
        return Err(QptError::Shape("Kraus operators differ in size".into()));
    }
    let n = qubits_for_dim(d)?;
    let res = kraus_tp_residual(kraus);
    if res > INPUT_TOL {
        return Err(QptError::Validation(format!(
            "Kraus set is not trace preserving (residual {res:e})"
        )));
    }
    let basis = cached_basis(n)?;
    let side = basis.len();
    let mut chi = ComplexMatrix::zeros(side, side);
    for k in kraus {
        chi += outer(&basis.coefficients(k));
    }
    ProcessMatrix::new(n, chi)
}

/// Kraus operators from the eigendecomposition of χ. Eigenvalues below
/// `cutoff` are dropped; negative ones are treated as zero.
pub fn chi_to_kraus(chi: &ProcessMatrix, cutoff: f64) -> Vec<ComplexMatrix> {
    let basis = chi.basis();
    let (vals, vecs) = hermitian_eigen(chi.chi());
    vals.iter()
        .enumerate()
        .filter(|(_, &l)| l > cutoff)
        .map(|(k, &l)| {
            let s = l.sqrt();
            let coeffs: Vec<Complex64> = vecs.column(k).iter().map(|&v| v * s).collect();
            basis.combine(&coeffs)
        })
        .collect()
}

/// `Σ_{αβ} χ_{αβ} E_α ρ E_β†` on a raw operator.
pub fn apply_chi(chi: &ProcessMatrix, rho: &ComplexMatrix) -> ComplexMatrix {
    let basis = chi.basis();
    let d = basis.dim();
    let n = basis.len();
    let left: Vec<ComplexMatrix> = basis.elements().iter().map(|e| e * rho).collect();
    let mut out = ComplexMatrix::zeros(d, d);
    let chi_m = chi.chi();
    for b in 0..n {
        let mut acc = ComplexMatrix::zeros(d, d);
        for (a, l) in left.iter().enumerate() {
            let w = chi_m[(a, b)];
            if w != ZERO {
                acc += l * w;
            }
        }
        out += acc * basis.element(b);
    }
    out
}

/// Heisenberg-picture action `ℰ†(M) = Σ χ_{αβ} E_β† M E_α`.
pub fn apply_chi_adjoint(chi: &ProcessMatrix, m: &ComplexMatrix) -> ComplexMatrix {
    let basis = chi.basis();
    let d = basis.dim();
    let n = basis.len();
    let right: Vec<ComplexMatrix> = basis.elements().iter().map(|e| m * e).collect();
    let mut out = ComplexMatrix::zeros(d, d);
    let chi_m = chi.chi();
    for b in 0..n {
        let mut acc = ComplexMatrix::zeros(d, d);
        for (a, r) in right.iter().enumerate() {
            let w = chi_m[(a, b)];
            if w != ZERO {
                acc += r * w;
            }
        }
        out += basis.element(b) * acc;
    }
    out
}

pub fn apply_channel(chi: &ProcessMatrix, rho: &QuantumState) -> Result<QuantumState> {
    if chi.n_qubits() != rho.n_qubits() {
        return Err(QptError::Shape(format!(
            "channel acts on {} qubit(s), state has {}",
            chi.n_qubits(),
            rho.n_qubits()
        )));
    }
    QuantumState::new(rho.n_qubits(), apply_chi(chi, rho.rho()))
}

/// Sequential composition: the returned χ applies `first` then `second`.
pub fn compose(first: &ProcessMatrix, second: &ProcessMatrix) -> Result<ProcessMatrix> {
    if first.n_qubits() != second.n_qubits() {
        return Err(QptError::Shape("composed channels differ in size".into()));
    }
    let basis = first.basis();
    let n = basis.len();
    // χ_total in terms of Pauli products: E_a E_c for a from `second`, c from `first`
    let mut out = ComplexMatrix::zeros(n, n);
    let (s, f) = (second.chi(), first.chi());
    for a in 0..n {
        for c in 0..n {
            let (pac, ac) = basis.product(a, c);
            for b in 0..n {
                let sab = s[(a, b)];
                if sab == ZERO {
                    continue;
                }
                for dd in 0..n {
                    let w = f[(c, dd)];
                    if w == ZERO {
                        continue;
                    }
                    // (E_b E_d)† = E_d E_b with conj phase of E_b E_d
                    let (pbd, bd) = basis.product(b, dd);
                    out[(ac, bd)] += sab * w * pac * pbd.conj();
                }
            }
        }
    }
    ProcessMatrix::new(first.n_qubits(), out)
}

#[derive(Serialize, Deserialize)]
struct ProcessMatrixJson {
    n_qubits: usize,
    re: Vec<Vec<f64>>,
    im: Vec<Vec<f64>>,
}

impl Serialize for ProcessMatrix {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let MatrixJson { re, im } = MatrixJson::from_matrix(&self.chi);
        ProcessMatrixJson { n_qubits: self.n_qubits, re, im }.serialize(s)
    }
}

impl<'de> Deserialize<'de> for ProcessMatrix {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let j = ProcessMatrixJson::deserialize(d)?;
        let m = MatrixJson { re: j.re, im: j.im }.to_matrix().map_err(serde::de::Error::custom)?;
        ProcessMatrix::new(j.n_qubits, m).map_err(serde::de::Error::custom)
    }
}

#[derive(Serialize, Deserialize)]
struct StateJson {
    n_qubits: usize,
    rho: MatrixJson,
}

impl Serialize for QuantumState {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        StateJson { n_qubits: self.n_qubits, rho: MatrixJson::from_matrix(&self.rho) }.serialize(s)
    }
}

impl<'de> Deserialize<'de> for QuantumState {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let j = StateJson::deserialize(d)?;
        let m = j.rho.to_matrix().map_err(serde::de::Error::custom)?;
        QuantumState::new(j.n_qubits, m).map_err(serde::de::Error::custom)
    }
}

#[derive(Serialize, Deserialize)]
struct MeasJson {
    n_qubits: usize,
    m: MatrixJson,
    outcome_label: String,
}

impl Serialize for MeasOperator {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        MeasJson {
            n_qubits: self.n_qubits,
            m: MatrixJson::from_matrix(&self.m),
            outcome_label: self.outcome_label.clone(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for MeasOperator {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let j = MeasJson::deserialize(d)?;
        let m = j.m.to_matrix().map_err(serde::de::Error::custom)?;
        MeasOperator::new(j.n_qubits, m, j.outcome_label).map_err(serde::de::Error::custom)
    }
}
