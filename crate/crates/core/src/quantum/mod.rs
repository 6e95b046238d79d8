//! Complex linear algebra, the Pauli basis and channel representations.

pub mod channel;
pub mod cholesky;
pub mod cptp;
pub mod matrix;
pub mod pauli;
pub mod vectorize;

pub use channel::{
    apply_channel, apply_chi, apply_chi_adjoint, cached_basis, chi_to_kraus, compose, kraus_to_chi,
    unitary_to_chi, MeasOperator, ProcessMatrix, QuantumState,
};
pub use cholesky::cholesky_build;
pub use cptp::{is_cptp, project_psd, project_tp, CptpReport, CPTP_TOL};
pub use matrix::{ComplexMatrix, ComplexVector};
pub use pauli::{pauli_basis, PauliBasis};
pub use vectorize::{devectorize, vectorize};
