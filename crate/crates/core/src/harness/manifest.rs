use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::ExperimentSpec;
use crate::error::Result;
use crate::SeededSource;

pub const MANIFEST_FILE: &str = "manifest.json";

pub fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}

/// Hash of the canonical JSON form of a spec. Thread count and output
/// location do not enter it.
pub fn spec_hash(spec: &ExperimentSpec) -> Result<String> {
    let mut canonical = spec.clone();
    canonical.threads = 0;
    canonical.out = None;
    // serde_json maps are ordered, so the text is canonical
    let value = serde_json::to_value(&canonical)?;
    Ok(sha256_hex(serde_json::to_string(&value)?.as_bytes()))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TaskSeed {
    pub label: String,
    pub source: SeededSource,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Artifact {
    /// Path relative to the run directory.
    pub path: String,
    pub sha256: String,
    pub bytes: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Predicate {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub tool_version: String,
    pub study: String,
    pub spec_hash: String,
    /// The effective configuration, flags applied.
    pub config: ExperimentSpec,
    pub tasks: Vec<TaskSeed>,
    pub artifacts: Vec<Artifact>,
    pub predicates: Vec<Predicate>,
    pub complete: bool,
    #[serde(default)]
    pub error: Option<String>,
}

impl RunManifest {
    pub fn passed(&self) -> bool {
        self.complete && self.predicates.iter().all(|p| p.passed)
    }

    pub fn write(&self, dir: &Path) -> Result<PathBuf> {
        let path = dir.join(MANIFEST_FILE);
        fs::write(&path, serde_json::to_string_pretty(self)? + "\n")?;
        Ok(path)
    }

    /// Reads `manifest.json` from a run directory, or the file itself.
    pub fn read(path: &Path) -> Result<Self> {
        let file = if path.is_dir() { path.join(MANIFEST_FILE) } else { path.to_path_buf() };
        Ok(serde_json::from_str(&fs::read_to_string(file)?)?)
    }

    /// Artifacts whose current bytes no longer match the recorded hash.
    pub fn verify_artifacts(&self, dir: &Path) -> Vec<String> {
        self.artifacts
            .iter()
            .filter(|a| fs::read(dir.join(&a.path)).map(|b| sha256_hex(&b) != a.sha256).unwrap_or(true))
            .map(|a| a.path.clone())
            .collect()
    }
}
