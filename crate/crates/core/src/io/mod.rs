//! Configuration, dataset files, result tables and experiment orchestration.
//!
//! File layout written by the commands under the output directory:
//!
//! ```text
//! manifest.json            config hash, seed, per-file sha256
//! identity/0000.json ...   error-matrix batch (identity or anomaly tags)
//! gates/0000.json ...      gate runs; the manifest records target χ and
//!                          the identity run each gate shares SPAM with
//! ```

pub mod commands;
pub mod config;
pub mod files;
pub mod plot;
pub mod study;
pub mod table;

use sha2::{Digest, Sha256};

pub use commands::*;
pub use config::{BenchmarkSettings, RunConfig, TargetKind, TwinSettings};
pub use files::{
    load_dataset, load_manifest, read_json, save_dataset, verify_manifest, write_json, write_text, FileEntry, FileKind,
    Manifest,
};
pub use study::*;
pub use table::{FidelityRow, ResultBundle, W1Row};

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

#[cfg(test)]
mod tests {
    #[test]
    fn sha256_known_vector() {
        assert_eq!(
            super::sha256_hex(b"abc"),
            "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad"
        );
    }
}
