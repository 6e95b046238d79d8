//! Linear map from χ to outcome probabilities.

use nalgebra::DMatrix;

use crate::error::{QptError, Result};
use crate::experiment::ProbeSet;
use crate::quantum::channel::ProcessMatrix;
use crate::quantum::matrix::{ComplexMatrix, ComplexVector};
use crate::quantum::pauli::PauliBasis;

/// Largest register the reconstruction stack handles; the 3-qubit sensing
/// matrix alone would need close to a gigabyte.
pub const MAX_RECONSTRUCTION_QUBITS: usize = 2;

/// `A[(i, μ), (α, β)] = Tr(M_μ E_α ρ_i E_β†)`, rows ordered like dataset rows,
/// column `α · n + β`.
#[derive(Debug, Clone)]
pub struct SensingMatrix {
    pub n_qubits: usize,
    pub a: ComplexMatrix,
}

impl SensingMatrix {
    pub fn rows(&self) -> usize {
        self.a.nrows()
    }

    pub fn cols(&self) -> usize {
        self.a.ncols()
    }

    /// Row-major vectorization `χ_{αβ} ↦ αn + β`.
    pub fn vec_chi(chi: &ComplexMatrix) -> ComplexVector {
        let n = chi.nrows();
        ComplexVector::from_fn(n * n, |k, _| chi[(k / n, k % n)])
    }

    /// Predicted probabilities `A vec(χ)` (real parts).
    pub fn apply(&self, chi: &ProcessMatrix) -> Vec<f64> {
        (&self.a * Self::vec_chi(chi.chi())).iter().map(|z| z.re).collect()
    }

    /// Real design matrix for the Hermitian parameterization of
    /// [`hermitian_params`]. Relies on `A_{βα} = conj(A_{αβ})`, which holds for
    /// Hermitian probes.
    pub fn real_design(&self) -> DMatrix<f64> {
        let n = (self.cols() as f64).sqrt().round() as usize;
        DMatrix::from_fn(self.rows(), self.cols(), |r, k| {
            let (a, b) = (k / n, k % n);
            let z = self.a[(r, a * n + b)];
            if a == b {
                z.re
            } else if a < b {
                2.0 * z.re
            } else {
                // k encodes Im χ_{ba}, b < a
                -2.0 * self.a[(r, b * n + a)].im
            }
        })
    }
}

/// Parameters `x[a n + b] = Re χ_ab` and `x[b n + a] = Im χ_ab` for `a < b`,
/// `x[a n + a] = χ_aa`.
pub fn hermitian_params(chi: &ComplexMatrix) -> Vec<f64> {
    let n = chi.nrows();
    let mut x = vec![0.0; n * n];
    for a in 0..n {
        x[a * n + a] = chi[(a, a)].re;
        for b in a + 1..n {
            x[a * n + b] = chi[(a, b)].re;
            x[b * n + a] = chi[(a, b)].im;
        }
    }
    x
}

pub fn chi_from_params(x: &[f64], n: usize) -> ComplexMatrix {
    ComplexMatrix::from_fn(n, n, |a, b| {
        use std::cmp::Ordering::*;
        match a.cmp(&b) {
            Equal => crate::quantum::matrix::c(x[a * n + a], 0.0),
            Less => crate::quantum::matrix::c(x[a * n + b], x[b * n + a]),
            Greater => crate::quantum::matrix::c(x[b * n + a], -x[a * n + b]),
        }
    })
}

pub fn check_reconstruction_size(n_qubits: usize) -> Result<()> {
    if n_qubits == 0 || n_qubits > MAX_RECONSTRUCTION_QUBITS {
        return Err(QptError::UnsupportedSize(format!(
            "reconstruction supports 1..={MAX_RECONSTRUCTION_QUBITS} qubits, got {n_qubits}"
        )));
    }
    Ok(())
}

pub fn sensing_matrix(probes: &ProbeSet, basis: &PauliBasis) -> Result<SensingMatrix> {
    check_reconstruction_size(probes.n_qubits)?;
    if basis.n_qubits() != probes.n_qubits {
        return Err(QptError::Shape(format!(
            "basis has {} qubit(s), probes {}",
            basis.n_qubits(),
            probes.n_qubits
        )));
    }
    let d = basis.dim();
    let n = basis.len();
    let n_eff = probes.n_effects();
    let mut a = ComplexMatrix::zeros(probes.n_preps() * n_eff, n * n);
    // Tr(M E_α ρ E_β) = Σ_jk (E_β M)_jk (E_α ρ)_kj, evaluated as one product per row
    let q_mats: Vec<ComplexMatrix> = probes
        .povms
        .iter()
        .map(|m| {
            ComplexMatrix::from_fn(n, d * d, |beta, jk| {
                let prod = basis.element(beta) * m.m();
                prod[(jk / d, jk % d)]
            })
        })
        .collect();
    for (i, rho) in probes.states.iter().enumerate() {
        let p_alpha: Vec<ComplexMatrix> = basis.elements().iter().map(|e| e * rho.rho()).collect();
        let p_mat = ComplexMatrix::from_fn(d * d, n, |jk, alpha| p_alpha[alpha][(jk % d, jk / d)]);
        for (mu, q) in q_mats.iter().enumerate() {
            let block = q * &p_mat; // (β, α)
            let row = i * n_eff + mu;
            for alpha in 0..n {
                for beta in 0..n {
                    a[(row, alpha * n + beta)] = block[(beta, alpha)];
                }
            }
        }
    }
    Ok(SensingMatrix { n_qubits: probes.n_qubits, a })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::experiment::{ideal_probes, simulate_qpt};
    use crate::noise::{build_spam, haar_random_gate, NoiseSpec, SpamChannels};
    use crate::quantum::channel::{cached_basis, unitary_to_chi};
    use crate::quantum::pauli::pauli;
    use crate::seed::rng_from_seed;

    #[test]
    fn one_qubit_shape_and_identity_row() {
        let probes = ideal_probes(1).unwrap();
        let s = sensing_matrix(&probes, cached_basis(1).unwrap()).unwrap();
        assert_eq!((s.rows(), s.cols()), (24, 16));
        let p = s.apply(&ProcessMatrix::identity(1));
        assert!((p[0] - 1.0).abs() < 1e-15);
    }

    #[test]
    fn reproduces_simulated_probabilities() {
        let probes = ideal_probes(1).unwrap();
        let s = sensing_matrix(&probes, cached_basis(1).unwrap()).unwrap();
        let x = unitary_to_chi(&pauli(1)).unwrap();
        let sim = simulate_qpt(&x, &SpamChannels::ideal(1), 0, &mut rng_from_seed(0)).unwrap();
        for (a, b) in s.apply(&x).iter().zip(sim.probabilities()) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn dressed_probes_match_noisy_simulation() {
        let mut rng = rng_from_seed(3);
        for n in 1..=2 {
            let spam = build_spam(&NoiseSpec::even(0.1), n, &mut rng).unwrap();
            let gate = haar_random_gate(n, &mut rng).unwrap();
            let probes = crate::experiment::dressed_probes(&spam).unwrap();
            let s = sensing_matrix(&probes, cached_basis(n).unwrap()).unwrap();
            let sim = simulate_qpt(&gate, &spam, 0, &mut rng).unwrap();
            for (a, b) in s.apply(&gate).iter().zip(sim.probabilities()) {
                assert!((a - b).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn real_design_agrees_with_complex_map() {
        let mut rng = rng_from_seed(8);
        let probes = ideal_probes(2).unwrap();
        let s = sensing_matrix(&probes, cached_basis(2).unwrap()).unwrap();
        let gate = haar_random_gate(2, &mut rng).unwrap();
        let x = nalgebra::DVector::from_vec(hermitian_params(gate.chi()));
        let via_real = s.real_design() * x;
        for (a, b) in via_real.iter().zip(s.apply(&gate)) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn params_round_trip() {
        let gate = haar_random_gate(1, &mut rng_from_seed(2)).unwrap();
        let back = chi_from_params(&hermitian_params(gate.chi()), 4);
        assert!(crate::quantum::matrix::frobenius(&(back - gate.chi())) < 1e-15);
    }

    #[test]
    fn three_qubits_rejected() {
        let probes = ideal_probes(3).unwrap();
        assert!(sensing_matrix(&probes, cached_basis(3).unwrap()).is_err());
    }
}
