//! Experiment orchestration: configuration, seeded task layout, CSV/JSON
//! artifacts and run manifests.

mod config;
mod hull;
mod manifest;
mod studies;

pub use config::{
    CensusSpec, ConeSpec, ExactSpec, ExperimentSpec, ExponentSpec, GridSpec, HullSpec, NuSpec, PalmSpec, SamplerSpec,
    StudyKind, WindowSpec,
};
pub use hull::{report_convex_hull, HullReport, HullRow};
pub use manifest::{sha256_hex, spec_hash, Artifact, Predicate, RunManifest, TaskSeed, MANIFEST_FILE};

use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::error::{Error, Result};
use crate::SeededSource;

/// Environment variable naming the default output root.
pub const OUT_ENV: &str = "WEAKSAW_OUT";

pub fn default_out_root() -> PathBuf {
    std::env::var_os(OUT_ENV).map(PathBuf::from).unwrap_or_else(|| PathBuf::from("runs"))
}

/// The run directory: `spec.out`, else `<root>/<study>-<hash prefix>`.
pub fn run_dir(spec: &ExperimentSpec) -> Result<PathBuf> {
    match &spec.out {
        Some(p) => Ok(p.clone()),
        None => Ok(default_out_root().join(format!("{}-{}", spec.study.name(), &spec_hash(spec)?[..12]))),
    }
}

/// Collects artifacts, predicates and task seeds while a study runs.
pub(crate) struct RunWriter {
    dir: PathBuf,
    pub(crate) tasks: Vec<TaskSeed>,
    pub(crate) artifacts: Vec<Artifact>,
    pub(crate) predicates: Vec<Predicate>,
}

impl RunWriter {
    fn new(dir: PathBuf) -> Self {
        Self { dir, tasks: Vec::new(), artifacts: Vec::new(), predicates: Vec::new() }
    }

    pub(crate) fn task(&mut self, label: impl Into<String>, source: SeededSource) {
        self.tasks.push(TaskSeed { label: label.into(), source });
    }

    pub(crate) fn predicate(&mut self, name: impl Into<String>, passed: bool, detail: impl Into<String>) {
        self.predicates.push(Predicate { name: name.into(), passed, detail: detail.into() });
    }

    pub(crate) fn bytes(&mut self, name: &str, bytes: &[u8]) -> Result<()> {
        let path = self.dir.join(name);
        if let Some(parent) = path.parent() {
            fs::create_dir_all(parent)?;
        }
        fs::write(&path, bytes)?;
        self.artifacts.push(Artifact { path: name.to_string(), sha256: sha256_hex(bytes), bytes: bytes.len() as u64 });
        Ok(())
    }

    pub(crate) fn csv<S: Serialize>(&mut self, name: &str, rows: &[S]) -> Result<()> {
        let mut w = csv::Writer::from_writer(Vec::new());
        for row in rows {
            w.serialize(row)?;
        }
        let bytes = w.into_inner().map_err(|e| Error::Io(e.into_error()))?;
        self.bytes(name, &bytes)
    }

    pub(crate) fn json<S: Serialize>(&mut self, name: &str, value: &S) -> Result<()> {
        let text = serde_json::to_string_pretty(value)? + "\n";
        self.bytes(name, text.as_bytes())
    }
}

/// Runs a study, writing its artifacts and `manifest.json` into
/// [`run_dir`]. A failing study still leaves a manifest, marked incomplete.
pub fn run_experiment(spec: &ExperimentSpec) -> Result<RunManifest> {
    spec.validate()?;
    let dir = run_dir(spec)?;
    fs::create_dir_all(&dir)?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(spec.threads)
        .build()
        .map_err(|e| Error::InvalidArgument(e.to_string()))?;
    let mut writer = RunWriter::new(dir.clone());
    let outcome = pool.install(|| studies::run(spec, &mut writer));
    let manifest = RunManifest {
        tool_version: env!("CARGO_PKG_VERSION").to_string(),
        study: spec.study.name().to_string(),
        spec_hash: spec_hash(spec)?,
        config: spec.clone(),
        tasks: writer.tasks,
        artifacts: writer.artifacts,
        predicates: writer.predicates,
        complete: outcome.is_ok(),
        error: outcome.as_ref().err().map(|e| e.to_string()),
    };
    manifest.write(&dir)?;
    outcome.map(|()| manifest)
}

/// Outcome of re-checking a finished run.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RunCheck {
    pub manifest: RunManifest,
    /// Artifacts that are missing or changed since the run.
    pub altered: Vec<String>,
}

impl RunCheck {
    pub fn passed(&self) -> bool {
        self.altered.is_empty() && self.manifest.passed()
    }
}

/// Reads a run directory's manifest and re-hashes its artifacts.
pub fn check_run(dir: &Path) -> Result<RunCheck> {
    let manifest = RunManifest::read(dir)?;
    let base = if dir.is_dir() { dir.to_path_buf() } else { dir.parent().map(Path::to_path_buf).unwrap_or_default() };
    let altered = manifest.verify_artifacts(&base);
    Ok(RunCheck { manifest, altered })
}
