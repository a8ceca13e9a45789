//! Resumable result store: one JSON file per cell under a content-addressed
//! tree, plus a manifest index. Writes go through a temp file and an atomic
//! rename, so an interrupted run leaves either a complete cell or nothing.
//! Payload checksums are verified on load; a corrupt cell is reported as
//! missing and silently recomputed.

use std::collections::BTreeMap;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::sync::Mutex;

use serde::{Deserialize, Serialize};

use crate::config::HarnessError;
use crate::hash::fnv64_hex;

/// What one cell computes: named per-k series and named scalars. BTreeMaps
/// keep the serialized form canonical.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct CellData {
    #[serde(default)]
    pub series: BTreeMap<String, Vec<f64>>,
    #[serde(default)]
    pub scalars: BTreeMap<String, f64>,
}

impl CellData {
    pub fn with_series(name: &str, values: Vec<f64>) -> Self {
        let mut data = CellData::default();
        data.series.insert(name.to_string(), values);
        data
    }

    pub fn series(&self, name: &str) -> &[f64] {
        self.series
            .get(name)
            .unwrap_or_else(|| panic!("cell is missing series '{name}'"))
    }
}

#[derive(Debug, Serialize, Deserialize)]
struct CellFile {
    key: String,
    version: String,
    /// Seconds since the Unix epoch at write time; informational only.
    created_at: u64,
    /// FNV-1a 64 of the canonical payload JSON.
    checksum: String,
    payload: CellData,
}

#[derive(Debug, Default, Serialize, Deserialize)]
struct Manifest {
    version: u32,
    /// key -> (relative path, payload checksum)
    entries: BTreeMap<String, ManifestEntry>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct ManifestEntry {
    path: String,
    checksum: String,
}

/// Directory-backed store. Cell computation may happen on any thread; only
/// the manifest update is serialized.
pub struct Store {
    root: PathBuf,
    manifest: Mutex<Manifest>,
}

fn payload_checksum(payload: &CellData) -> Result<String, HarnessError> {
    Ok(fnv64_hex(serde_json::to_string(payload)?.as_bytes()))
}

pub(crate) fn atomic_write(path: &Path, bytes: &[u8]) -> Result<(), HarnessError> {
    let dir = path.parent().expect("store paths have parents");
    let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
    tmp.write_all(bytes)?;
    tmp.flush()?;
    tmp.persist(path).map_err(|e| HarnessError::Io(e.error))?;
    Ok(())
}

impl Store {
    pub fn open(root: &Path) -> Result<Self, HarnessError> {
        std::fs::create_dir_all(root)?;
        let manifest_path = root.join("manifest.json");
        let manifest = match std::fs::read_to_string(&manifest_path) {
            Ok(text) => serde_json::from_str(&text).unwrap_or_default(),
            Err(_) => Manifest::default(),
        };
        Ok(Store { root: root.to_path_buf(), manifest: Mutex::new(manifest) })
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    fn cell_path(&self, experiment: &str, key: &str) -> PathBuf {
        self.root.join(experiment).join(format!("{}.json", fnv64_hex(key.as_bytes())))
    }

    /// Loads a cell, returning `None` for anything unusable: missing file,
    /// unparsable JSON, key mismatch (hash collision), or checksum mismatch
    /// (corruption). All of those mean "recompute".
    pub fn load(&self, experiment: &str, key: &str) -> Option<CellData> {
        let path = self.cell_path(experiment, key);
        let text = std::fs::read_to_string(&path).ok()?;
        let cell: CellFile = match serde_json::from_str(&text) {
            Ok(c) => c,
            Err(_) => {
                eprintln!("store: unreadable cell {path:?}; recomputing");
                return None;
            }
        };
        if cell.key != key {
            return None;
        }
        match payload_checksum(&cell.payload) {
            Ok(sum) if sum == cell.checksum => Some(cell.payload),
            _ => {
                eprintln!("store: checksum mismatch for {path:?}; recomputing");
                None
            }
        }
    }

    pub fn save(&self, experiment: &str, key: &str, payload: &CellData) -> Result<(), HarnessError> {
        let path = self.cell_path(experiment, key);
        std::fs::create_dir_all(path.parent().expect("cell path has a parent"))?;
        let checksum = payload_checksum(payload)?;
        let created_at = std::time::SystemTime::now()
            .duration_since(std::time::UNIX_EPOCH)
            .map(|d| d.as_secs())
            .unwrap_or(0);
        let cell = CellFile {
            key: key.to_string(),
            version: env!("CARGO_PKG_VERSION").to_string(),
            created_at,
            checksum: checksum.clone(),
            payload: payload.clone(),
        };
        atomic_write(&path, serde_json::to_string_pretty(&cell)?.as_bytes())?;

        let rel = format!("{experiment}/{}.json", fnv64_hex(key.as_bytes()));
        let mut manifest = self.manifest.lock().expect("manifest lock");
        manifest.entries.insert(key.to_string(), ManifestEntry { path: rel, checksum });
        let bytes = serde_json::to_string_pretty(&*manifest)?.into_bytes();
        drop(manifest);
        atomic_write(&self.root.join("manifest.json"), &bytes)?;
        Ok(())
    }

    /// Removes the whole cache directory.
    pub fn clean(root: &Path) -> Result<(), HarnessError> {
        if root.exists() {
            std::fs::remove_dir_all(root)?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> CellData {
        let mut data = CellData::with_series("distance", vec![0.25, 0.125]);
        data.scalars.insert("t".into(), 3.0);
        data
    }

    #[test]
    fn round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let store = Store::open(dir.path()).unwrap();
        assert!(store.load("exp", "k1").is_none());
        store.save("exp", "k1", &sample()).unwrap();
        assert_eq!(store.load("exp", "k1"), Some(sample()));
        // Reopen from disk.
        let store2 = Store::open(dir.path()).unwrap();
        assert_eq!(store2.load("exp", "k1"), Some(sample()));
    }

    #[test]
    fn corruption_reads_as_missing() {
        let dir = tempfile::tempdir().unwrap();
        let store = Store::open(dir.path()).unwrap();
        store.save("exp", "k1", &sample()).unwrap();
        let path = store.cell_path("exp", "k1");
        let mangled = std::fs::read_to_string(&path).unwrap().replace("0.25", "0.7");
        std::fs::write(&path, mangled).unwrap();
        assert!(store.load("exp", "k1").is_none());
        // Recompute-and-save heals the cell.
        store.save("exp", "k1", &sample()).unwrap();
        assert_eq!(store.load("exp", "k1"), Some(sample()));
    }

    #[test]
    fn key_mismatch_reads_as_missing() {
        let dir = tempfile::tempdir().unwrap();
        let store = Store::open(dir.path()).unwrap();
        store.save("exp", "k1", &sample()).unwrap();
        // Simulate a path collision by copying the file onto another key's path.
        let other = store.cell_path("exp", "k2");
        std::fs::copy(store.cell_path("exp", "k1"), &other).unwrap();
        assert!(store.load("exp", "k2").is_none());
    }

    #[test]
    fn clean_removes_everything() {
        let dir = tempfile::tempdir().unwrap();
        let root = dir.path().join("cache");
        let store = Store::open(&root).unwrap();
        store.save("exp", "k1", &sample()).unwrap();
        Store::clean(&root).unwrap();
        assert!(!root.exists());
        Store::clean(&root).unwrap(); // idempotent
    }
}
