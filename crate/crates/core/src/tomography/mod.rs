//! Process reconstruction: sensing matrix, CPTP-constrained least squares,
//! probe estimation and error mitigation.

pub mod em;
pub mod estimate;
pub mod reconstruct;
pub mod sensing;

pub use em::{em_qpt, em_qpt_report, mitigated_reconstructor, std_qpt, std_qpt_report};
pub use estimate::{estimate_povms, estimate_states, mitigated_probes};
pub use reconstruct::{
    project_cptp, reconstruct_chi, Projection, ReconstructionOptions, ReconstructionReport, Reconstructor, Weighting,
};
pub use sensing::{sensing_matrix, SensingMatrix};
