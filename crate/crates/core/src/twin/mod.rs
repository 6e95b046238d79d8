//! Generative digital twin of the error matrix.

pub mod features;
pub mod ml;
pub mod network;
pub mod qprocess;
pub mod vae;

pub use features::{chi_to_features, features_to_chi_raw};
pub use ml::{ml_qpt, TwinBank};
pub use vae::{
    latent_diagnostics, loss, loss_and_gradient, reparameterize, sample_twins, train, LatentStats, TrainOptions,
    TrainingRecord, VaeConfig, VaeModel,
};
