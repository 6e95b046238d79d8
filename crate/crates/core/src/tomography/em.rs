//! Error-mitigated tomography: reconstruct with probes estimated from an
//! identity-process error matrix.

use super::estimate::mitigated_probes;
use super::reconstruct::{ReconstructionOptions, ReconstructionReport, Reconstructor};
use crate::error::{QptError, Result};
use crate::experiment::{ideal_probes, TomographyDataset};
use crate::quantum::channel::ProcessMatrix;

/// Reconstructor built from the probes implied by one error matrix.
pub fn mitigated_reconstructor(error_chi: &ProcessMatrix, opts: &ReconstructionOptions) -> Result<Reconstructor> {
    Reconstructor::new(&mitigated_probes(error_chi, opts)?)
}

pub fn em_qpt_report(
    gate_data: &TomographyDataset,
    error_chi: &ProcessMatrix,
    opts: &ReconstructionOptions,
) -> Result<ReconstructionReport> {
    if gate_data.n_qubits != error_chi.n_qubits() {
        return Err(QptError::Shape("gate data and error matrix differ in qubit count".into()));
    }
    mitigated_reconstructor(error_chi, opts)?.reconstruct(gate_data, opts)
}

pub fn em_qpt(gate_data: &TomographyDataset, error_chi: &ProcessMatrix, opts: &ReconstructionOptions) -> Result<ProcessMatrix> {
    Ok(em_qpt_report(gate_data, error_chi, opts)?.chi)
}

/// Standard tomography with ideal probes.
pub fn std_qpt_report(data: &TomographyDataset, opts: &ReconstructionOptions) -> Result<ReconstructionReport> {
    Reconstructor::new(&ideal_probes(data.n_qubits)?)?.reconstruct(data, opts)
}

pub fn std_qpt(data: &TomographyDataset, opts: &ReconstructionOptions) -> Result<ProcessMatrix> {
    Ok(std_qpt_report(data, opts)?.chi)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::experiment::simulate_qpt;
    use crate::noise::{build_spam, haar_random_gate, NoiseSpec, SpamChannels};
    use crate::quantum::matrix::{frobenius, trace_of_product};
    use crate::seed::rng_from_seed;

    #[test]
    fn noiseless_error_matrix_reduces_to_std() {
        let mut rng = rng_from_seed(2);
        let g = haar_random_gate(1, &mut rng).unwrap();
        let data = simulate_qpt(&g, &SpamChannels::ideal(1), 10_000, &mut rng).unwrap();
        let opts = ReconstructionOptions::default();
        let std = std_qpt(&data, &opts).unwrap();
        let em = em_qpt(&data, &ProcessMatrix::identity(1), &opts).unwrap();
        assert!(frobenius(&(std.chi() - em.chi())) < 1e-6);
    }

    #[test]
    fn mitigation_beats_std_under_spam() {
        let spec = NoiseSpec::even(0.05);
        let opts = ReconstructionOptions::default();
        let (mut e_std, mut e_em) = (0.0, 0.0);
        for k in 0..5 {
            let mut rng = rng_from_seed(100 + k);
            let spam = build_spam(&spec, 1, &mut rng).unwrap();
            let g = haar_random_gate(1, &mut rng).unwrap();
            let id = simulate_qpt(&ProcessMatrix::identity(1), &spam, 10_000, &mut rng).unwrap();
            let data = simulate_qpt(&g, &spam, 10_000, &mut rng).unwrap();
            let err = std_qpt(&id, &opts).unwrap();
            e_std += 1.0 - trace_of_product(g.chi(), std_qpt(&data, &opts).unwrap().chi()).re;
            e_em += 1.0 - trace_of_product(g.chi(), em_qpt(&data, &err, &opts).unwrap().chi()).re;
        }
        assert!(e_std > 5.0 * e_em, "std {e_std} em {e_em}");
    }
}
