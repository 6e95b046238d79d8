//! Least-squares χ reconstruction followed by a projection onto CPTP maps.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use super::sensing::{chi_from_params, check_reconstruction_size, sensing_matrix, SensingMatrix};
use crate::error::{QptError, Result};
use crate::experiment::{ProbeSet, TomographyDataset};
use crate::quantum::channel::{cached_basis, ProcessMatrix};
use crate::quantum::cptp::{cptp_report, mix_to_psd, project_psd, project_tp, CptpReport};
use crate::quantum::matrix::frobenius;
use crate::quantum::pauli::PauliBasis;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum Projection {
    /// Dykstra alternation between the PSD cone and the TP affine set.
    #[default]
    Dykstra,
    /// One TP projection followed by the minimal mix toward `I/n`.
    SinglePass,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum Weighting {
    #[default]
    Uniform,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ReconstructionOptions {
    pub max_iterations: usize,
    pub convergence_tol: f64,
    pub projection: Projection,
    pub weighting: Weighting,
}

impl Default for ReconstructionOptions {
    fn default() -> Self {
        ReconstructionOptions {
            max_iterations: 5000,
            convergence_tol: 1e-10,
            projection: Projection::Dykstra,
            weighting: Weighting::Uniform,
        }
    }
}

impl ReconstructionOptions {
    pub fn validate(&self) -> Result<()> {
        if !(self.convergence_tol > 0.0) {
            return Err(QptError::Config {
                field: "reconstruction.convergence_tol".into(),
                message: "must be positive".into(),
            });
        }
        if self.max_iterations == 0 {
            return Err(QptError::Config {
                field: "reconstruction.max_iterations".into(),
                message: "must be at least 1".into(),
            });
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReconstructionReport {
    pub chi: ProcessMatrix,
    /// `||A vec(χ) − p̃||₂` of the returned χ.
    pub residual: f64,
    /// Projection iterations used.
    pub iterations: usize,
    pub cptp_report: CptpReport,
}

/// Distance to the PSD cone below which a capped Dykstra run is accepted.
pub const STALL_RESIDUAL: f64 = 1e-3;

/// Projection of a Hermitian matrix onto CPTP χ matrices. Returns the
/// projected matrix and the iteration count.
pub fn project_cptp(
    basis: &PauliBasis,
    x0: &nalgebra::DMatrix<num_complex::Complex64>,
    opts: &ReconstructionOptions,
) -> Result<(nalgebra::DMatrix<num_complex::Complex64>, usize)> {
    opts.validate()?;
    if opts.projection == Projection::SinglePass {
        return Ok((mix_to_psd(&project_tp(basis, x0)).0, 1));
    }
    let mut x = x0.clone();
    let mut p = x0.scale(0.0);
    let mut q = p.clone();
    for it in 1..=opts.max_iterations {
        let y = project_psd(&(&x + &p));
        p = &x + &p - &y;
        let x_new = project_tp(basis, &(&y + &q));
        q = &y + &q - &x_new;
        let step = frobenius(&(&x_new - &x));
        x = x_new;
        if step < opts.convergence_tol {
            // x is exactly TP; any remaining negativity is at the tolerance scale
            return Ok((mix_to_psd(&x).0, it));
        }
    }
    // Dykstra crawls when the solution sits on a face of the PSD cone; a
    // TP iterate this close to the cone is kept, mixed to be exactly PSD
    let residual = frobenius(&(&x - project_psd(&x)));
    if residual <= STALL_RESIDUAL {
        return Ok((mix_to_psd(&x).0, opts.max_iterations));
    }
    Err(QptError::NonConvergence {
        context: "CPTP projection".into(),
        iterations: opts.max_iterations,
        residual,
    })
}

/// Cached sensing data for a fixed probe set: reusable across datasets.
#[derive(Debug, Clone)]
pub struct Reconstructor {
    n_qubits: usize,
    sensing: SensingMatrix,
    design: DMatrix<f64>,
    solver: Solver,
}

#[derive(Debug, Clone)]
enum Solver {
    Cholesky(nalgebra::linalg::Cholesky<f64, nalgebra::Dyn>),
    Svd(nalgebra::linalg::SVD<f64, nalgebra::Dyn, nalgebra::Dyn>),
}

impl Reconstructor {
    pub fn new(probes: &ProbeSet) -> Result<Self> {
        check_reconstruction_size(probes.n_qubits)?;
        let basis = cached_basis(probes.n_qubits)?;
        let sensing = sensing_matrix(probes, basis)?;
        let design = sensing.real_design();
        let gram = design.transpose() * &design;
        let solver = match gram.clone().cholesky() {
            Some(ch) => Solver::Cholesky(ch),
            // rank-deficient probes fall back to the pseudo-inverse
            None => Solver::Svd(design.clone().svd(true, true)),
        };
        Ok(Reconstructor { n_qubits: probes.n_qubits, sensing, design, solver })
    }

    pub fn sensing(&self) -> &SensingMatrix {
        &self.sensing
    }

    /// Unconstrained Hermitian least-squares estimate.
    pub fn least_squares(&self, probs: &[f64]) -> Result<nalgebra::DMatrix<num_complex::Complex64>> {
        if probs.len() != self.design.nrows() {
            return Err(QptError::Shape(format!(
                "dataset has {} probabilities, sensing matrix {} rows",
                probs.len(),
                self.design.nrows()
            )));
        }
        let p = DVector::from_column_slice(probs);
        let x = match &self.solver {
            Solver::Cholesky(ch) => ch.solve(&(self.design.transpose() * p)),
            Solver::Svd(svd) => svd.solve(&p, 1e-12).map_err(|e| QptError::Consistency(e.to_string()))?,
        };
        let n = 4usize.pow(self.n_qubits as u32);
        Ok(chi_from_params(x.as_slice(), n))
    }

    pub fn reconstruct(&self, data: &TomographyDataset, opts: &ReconstructionOptions) -> Result<ReconstructionReport> {
        if data.n_qubits != self.n_qubits {
            return Err(QptError::Shape(format!(
                "dataset has {} qubit(s), probes {}",
                data.n_qubits, self.n_qubits
            )));
        }
        self.reconstruct_probabilities(&data.probabilities(), opts)
    }

    pub fn reconstruct_probabilities(&self, probs: &[f64], opts: &ReconstructionOptions) -> Result<ReconstructionReport> {
        let basis = cached_basis(self.n_qubits)?;
        let ls = self.least_squares(probs)?;
        let (chi, iterations) = project_cptp(basis, &ls, opts)?;
        let chi = ProcessMatrix::new(self.n_qubits, chi)?;
        let predicted = self.sensing.apply(&chi);
        let residual = predicted.iter().zip(probs).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt();
        let cptp_report = cptp_report(basis, chi.chi());
        Ok(ReconstructionReport { chi, residual, iterations, cptp_report })
    }
}

/// One-shot reconstruction; prefer [`Reconstructor`] when probes repeat.
pub fn reconstruct_chi(data: &TomographyDataset, probes: &ProbeSet, opts: &ReconstructionOptions) -> Result<ProcessMatrix> {
    if data.n_qubits != probes.n_qubits {
        return Err(QptError::Shape("dataset and probes differ in qubit count".into()));
    }
    Ok(Reconstructor::new(probes)?.reconstruct(data, opts)?.chi)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::experiment::{ideal_probes, simulate_qpt};
    use crate::noise::{haar_random_gate, random_cptp, SpamChannels};
    use crate::quantum::cptp::CPTP_TOL;
    use crate::quantum::matrix::trace_of_product;
    use crate::seed::rng_from_seed;

    fn fidelity_pure(target: &ProcessMatrix, est: &ProcessMatrix) -> f64 {
        trace_of_product(target.chi(), est.chi()).re
    }

    #[test]
    fn noiseless_identity_recovered() {
        let data = simulate_qpt(&ProcessMatrix::identity(1), &SpamChannels::ideal(1), 0, &mut rng_from_seed(0)).unwrap();
        let chi = reconstruct_chi(&data, &ideal_probes(1).unwrap(), &ReconstructionOptions::default()).unwrap();
        assert!((chi.chi()[(0, 0)].re - 1.0).abs() < 1e-8);
    }

    #[test]
    fn noiseless_haar_unitaries() {
        let mut rng = rng_from_seed(21);
        let rec = Reconstructor::new(&ideal_probes(1).unwrap()).unwrap();
        for _ in 0..20 {
            let g = haar_random_gate(1, &mut rng).unwrap();
            let data = simulate_qpt(&g, &SpamChannels::ideal(1), 0, &mut rng).unwrap();
            let r = rec.reconstruct(&data, &ReconstructionOptions::default()).unwrap();
            assert!(1.0 - fidelity_pure(&g, &r.chi) < 1e-8);
            assert!(r.cptp_report.is_valid(1e-6));
        }
    }

    #[test]
    fn shot_noise_floor() {
        let mut rng = rng_from_seed(4);
        let rec = Reconstructor::new(&ideal_probes(1).unwrap()).unwrap();
        let g = haar_random_gate(1, &mut rng).unwrap();
        let data = simulate_qpt(&g, &SpamChannels::ideal(1), 10_000, &mut rng).unwrap();
        let r = rec.reconstruct(&data, &ReconstructionOptions::default()).unwrap();
        // least squares on a rank-1 target sits on the PSD boundary: the floor
        // is O(1/sqrt(shots)), a few 1e-3 here
        assert!(1.0 - fidelity_pure(&g, &r.chi) < 1e-2);
        assert!(r.cptp_report.is_valid(1e-6));
    }

    #[test]
    fn projection_idempotent_on_cptp() {
        let basis = cached_basis(1).unwrap();
        let mut rng = rng_from_seed(5);
        for rank in 1..=4 {
            let x = random_cptp(1, rank, &mut rng).unwrap();
            let (p, _) = project_cptp(basis, x.chi(), &ReconstructionOptions::default()).unwrap();
            assert!(frobenius(&(p - x.chi())) <= 1e-10);
        }
    }

    #[test]
    fn single_pass_is_cptp() {
        let basis = cached_basis(1).unwrap();
        let mut x = ProcessMatrix::identity(1).into_chi();
        x[(0, 0)] = crate::quantum::matrix::c(1.3, 0.0);
        x[(2, 2)] = crate::quantum::matrix::c(-0.3, 0.0);
        let opts = ReconstructionOptions { projection: Projection::SinglePass, ..Default::default() };
        let (p, _) = project_cptp(basis, &x, &opts).unwrap();
        assert!(cptp_report(basis, &p).is_valid(CPTP_TOL));
    }

    #[test]
    fn non_convergence_reported() {
        let basis = cached_basis(1).unwrap();
        let mut x = ProcessMatrix::identity(1).into_chi();
        x[(1, 1)] = crate::quantum::matrix::c(-0.5, 0.0);
        x[(1, 2)] = crate::quantum::matrix::c(0.2, 0.1);
        x[(2, 1)] = crate::quantum::matrix::c(0.2, -0.1);
        let opts = ReconstructionOptions { max_iterations: 1, ..Default::default() };
        assert!(matches!(project_cptp(basis, &x, &opts), Err(QptError::NonConvergence { .. })));
    }

    #[test]
    fn two_qubit_noiseless() {
        let mut rng = rng_from_seed(6);
        let rec = Reconstructor::new(&ideal_probes(2).unwrap()).unwrap();
        let g = haar_random_gate(2, &mut rng).unwrap();
        let data = simulate_qpt(&g, &SpamChannels::ideal(2), 0, &mut rng).unwrap();
        let r = rec.reconstruct(&data, &ReconstructionOptions::default()).unwrap();
        assert!(1.0 - fidelity_pure(&g, &r.chi) < 1e-8);
    }
}
