//! Tomography mitigated with sampled digital twins of the error matrix.

use rayon::prelude::*;

use super::vae::{sample_twins, VaeModel};
use crate::error::{QptError, Result};
use crate::experiment::TomographyDataset;
use crate::quantum::channel::ProcessMatrix;
use crate::seed::Rng;
use crate::tomography::{mitigated_reconstructor, ReconstructionOptions, Reconstructor};

/// Twins together with their mitigated reconstructors, reusable across gates.
#[derive(Debug, Clone)]
pub struct TwinBank {
    pub twins: Vec<ProcessMatrix>,
    reconstructors: Vec<Reconstructor>,
}

impl TwinBank {
    pub fn new(twins: Vec<ProcessMatrix>, opts: &ReconstructionOptions) -> Result<TwinBank> {
        if twins.is_empty() {
            return Err(QptError::Empty("twin set".into()));
        }
        let reconstructors = twins.par_iter().map(|t| mitigated_reconstructor(t, opts)).collect::<Result<Vec<_>>>()?;
        Ok(TwinBank { twins, reconstructors })
    }

    pub fn sample(model: &VaeModel, n_twins: usize, opts: &ReconstructionOptions, rng: &mut Rng) -> Result<TwinBank> {
        TwinBank::new(sample_twins(model, n_twins, rng)?, opts)
    }

    pub fn len(&self) -> usize {
        self.twins.len()
    }

    pub fn is_empty(&self) -> bool {
        self.twins.is_empty()
    }

    /// One mitigated reconstruction of `gate_data` per twin.
    pub fn reconstruct(&self, gate_data: &TomographyDataset, opts: &ReconstructionOptions) -> Result<Vec<ProcessMatrix>> {
        self.reconstructors
            .par_iter()
            .map(|r| Ok(r.reconstruct(gate_data, opts)?.chi))
            .collect()
    }
}

/// Ensemble of EM reconstructions of `gate_data`, one per sampled twin.
pub fn ml_qpt(
    gate_data: &TomographyDataset,
    model: &VaeModel,
    n_twins: usize,
    opts: &ReconstructionOptions,
    rng: &mut Rng,
) -> Result<Vec<ProcessMatrix>> {
    if gate_data.n_qubits != model.n_qubits {
        return Err(QptError::Shape("gate data and model differ in qubit count".into()));
    }
    TwinBank::sample(model, n_twins, opts, rng)?.reconstruct(gate_data, opts)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::experiment::simulate_qpt;
    use crate::noise::{haar_random_gate, SpamChannels};
    use crate::seed::rng_from_seed;
    use crate::tomography::std_qpt;
    use crate::twin::vae::{train, TrainOptions, VaeConfig};

    #[test]
    fn identity_twins_reduce_to_std() {
        let data = vec![ProcessMatrix::identity(1); 8];
        let model = VaeModel::new(1, &VaeConfig { hidden: vec![8, 6], ..Default::default() }, 1).unwrap();
        let opts = TrainOptions { epochs: 100, batch_size: 8, learning_rate: 3e-3 };
        let (model, _) = train(model, &data, &opts, &mut rng_from_seed(1)).unwrap();
        let mut rng = rng_from_seed(2);
        let g = haar_random_gate(1, &mut rng).unwrap();
        let gate_data = simulate_qpt(&g, &SpamChannels::ideal(1), 10_000, &mut rng).unwrap();
        let ropts = ReconstructionOptions::default();
        let std = std_qpt(&gate_data, &ropts).unwrap();
        let ens = ml_qpt(&gate_data, &model, 4, &ropts, &mut rng).unwrap();
        assert_eq!(ens.len(), 4);
        for chi in ens {
            let f_std = crate::metrics::process_fidelity(&std, &g).unwrap();
            let f_ml = crate::metrics::process_fidelity(&chi, &g).unwrap();
            assert!((f_std - f_ml).abs() < 5e-3);
        }
    }
}
