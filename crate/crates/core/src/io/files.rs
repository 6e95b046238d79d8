//! JSON files, dataset batches and the manifest.

use std::path::{Path, PathBuf};

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use super::sha256_hex;
use crate::error::{QptError, Result};
use crate::experiment::{DatasetTag, TomographyDataset};
use crate::quantum::channel::ProcessMatrix;

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> QptError + '_ {
    move |source| QptError::Io { path: path.display().to_string(), source }
}

/// Writes `text`, creating parent directories.
pub fn write_text(path: &Path, text: &str) -> Result<()> {
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        std::fs::create_dir_all(parent).map_err(io_err(parent))?;
    }
    std::fs::write(path, text).map_err(io_err(path))
}

pub fn read_text(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(io_err(path))
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let text = serde_json::to_string_pretty(value)
        .map_err(|e| QptError::Parse { path: path.display().to_string(), message: e.to_string() })?;
    write_text(path, &(text + "\n"))
}

pub fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T> {
    let text = read_text(path)?;
    serde_json::from_str(&text).map_err(|e| QptError::Parse { path: path.display().to_string(), message: e.to_string() })
}

pub fn save_dataset(path: &Path, dataset: &TomographyDataset) -> Result<()> {
    write_json(path, dataset)
}

pub fn load_dataset(path: &Path) -> Result<TomographyDataset> {
    let ds: TomographyDataset = read_json(path)?;
    ds.validate().map_err(|e| QptError::Parse { path: path.display().to_string(), message: e.to_string() })?;
    Ok(ds)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FileKind {
    IdentityRun,
    Anomaly,
    GateRun,
    Twin,
}

impl From<DatasetTag> for FileKind {
    fn from(tag: DatasetTag) -> Self {
        match tag {
            DatasetTag::IdentityRun => FileKind::IdentityRun,
            DatasetTag::Anomaly => FileKind::Anomaly,
            DatasetTag::GateRun => FileKind::GateRun,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FileEntry {
    /// Path relative to the manifest directory.
    pub file: String,
    pub kind: FileKind,
    pub sha256: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gate_label: Option<String>,
    /// True process of a gate run.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub target: Option<ProcessMatrix>,
    /// Index of the identity run sharing this gate run's SPAM realisation.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub identity_index: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub config_hash: String,
    pub seed: u64,
    pub n_qubits: usize,
    pub files: Vec<FileEntry>,
}

pub const MANIFEST: &str = "manifest.json";

impl Manifest {
    pub fn of_kind(&self, kinds: &[FileKind]) -> impl Iterator<Item = &FileEntry> {
        let kinds = kinds.to_vec();
        self.files.iter().filter(move |f| kinds.contains(&f.kind))
    }

    pub fn anomaly_count(&self) -> usize {
        self.of_kind(&[FileKind::Anomaly]).count()
    }
}

/// Writes `value` as JSON at `dir/rel` and returns its manifest entry.
pub fn store<T: Serialize>(dir: &Path, rel: &str, kind: FileKind, value: &T) -> Result<FileEntry> {
    let path = dir.join(rel);
    write_json(&path, value)?;
    let sha256 = sha256_hex(read_text(&path)?.as_bytes());
    Ok(FileEntry { file: rel.into(), kind, sha256, gate_label: None, target: None, identity_index: None })
}

pub fn numbered(prefix: &str, k: usize) -> String {
    format!("{prefix}/{k:04}.json")
}

pub fn load_manifest(dir: &Path) -> Result<Manifest> {
    read_json(&dir.join(MANIFEST))
}

/// Checks that every listed file exists with its recorded digest and, when
/// given, that the manifest was written under `config_hash`.
pub fn verify_manifest(dir: &Path, config_hash: Option<&str>) -> Result<Manifest> {
    let manifest = load_manifest(dir)?;
    if let Some(h) = config_hash {
        if manifest.config_hash != h {
            return Err(QptError::Validation(format!(
                "manifest in {} was written for config {}, current config is {h}",
                dir.display(),
                manifest.config_hash
            )));
        }
    }
    for entry in &manifest.files {
        let path: PathBuf = dir.join(&entry.file);
        let digest = sha256_hex(read_text(&path)?.as_bytes());
        if digest != entry.sha256 {
            return Err(QptError::Validation(format!("{} does not match its manifest digest", path.display())));
        }
    }
    Ok(manifest)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::experiment::simulate_qpt;
    use crate::noise::SpamChannels;
    use crate::seed::rng_from_seed;

    #[test]
    fn dataset_file_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let ds = simulate_qpt(&ProcessMatrix::identity(1), &SpamChannels::ideal(1), 100, &mut rng_from_seed(3)).unwrap();
        let p = dir.path().join("a/b.json");
        save_dataset(&p, &ds).unwrap();
        assert_eq!(load_dataset(&p).unwrap(), ds);
        let v: serde_json::Value = read_json(&p).unwrap();
        for key in ["n_qubits", "shots", "seed", "tag", "rows"] {
            assert!(v.get(key).is_some(), "{key}");
        }
    }

    #[test]
    fn manifest_detects_tampering() {
        let dir = tempfile::tempdir().unwrap();
        let e = store(dir.path(), &numbered("identity", 0), FileKind::IdentityRun, &ProcessMatrix::identity(1)).unwrap();
        let m = Manifest { config_hash: "h".into(), seed: 1, n_qubits: 1, files: vec![e] };
        write_json(&dir.path().join(MANIFEST), &m).unwrap();
        verify_manifest(dir.path(), Some("h")).unwrap();
        assert!(verify_manifest(dir.path(), Some("other")).is_err());
        write_text(&dir.path().join("identity/0000.json"), "{}").unwrap();
        assert!(verify_manifest(dir.path(), None).is_err());
    }

    #[test]
    fn missing_file_is_io_error() {
        let e = load_dataset(Path::new("/nonexistent/x.json")).unwrap_err();
        assert_eq!(e.kind(), "io");
    }
}
