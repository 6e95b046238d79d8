//! SPAM-error-mitigated quantum process tomography.
//!
//! The crate simulates process tomography experiments dressed with state
//! preparation and measurement (SPAM) noise, reconstructs CPTP process
//! matrices, mitigates SPAM errors from identity-process "error matrices",
//! and trains a variational autoencoder that generates synthetic error
//! matrices for mitigation without fresh identity runs.
//!
//! Module map:
//!
//! * [`quantum`]: Pauli basis, channel representations, CPTP checks.
//! * [`noise`]: SPAM channels, Haar unitaries, random CPTP maps, anomalies.
//! * [`experiment`]: the 12^N circuit family, noisy outcome simulation.
//! * [`tomography`]: sensing matrix, constrained reconstruction, probe
//!   estimation and the error-mitigated pipeline.
//! * [`twin`]: the variational autoencoder over error matrices.
//! * [`metrics`]: fidelities, log-infidelity and Wasserstein-1 distances.
//! * [`io`]: configuration, dataset files and experiment orchestration.

pub mod error;
pub mod experiment;
pub mod io;
pub mod metrics;
pub mod noise;
pub mod quantum;
pub mod seed;
pub mod tomography;
pub mod twin;

pub use error::{QptError, Result};
pub use num_complex::Complex64;
