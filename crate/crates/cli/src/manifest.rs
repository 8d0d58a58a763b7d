use std::path::{Path, PathBuf};

use qcvv_core::rng::PRNG_ALGORITHM;
use serde::{Deserialize, Serialize};

use crate::config::{ExperimentConfig, Protocol};
use crate::error::{CliError, CliResult};
use crate::json::{read_json, sha256_file, write_json};

pub const MANIFEST_FILE: &str = "manifest.json";

pub const CODE_VERSION: &str = concat!(env!("CARGO_PKG_NAME"), " ", env!("CARGO_PKG_VERSION"));

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RunStatus {
    Running,
    Complete,
    Failed,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct OutputFile {
    /// Relative to the manifest's directory.
    pub path: PathBuf,
    pub sha256: String,
    pub task: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunManifest {
    pub protocol: Protocol,
    pub config_hash: String,
    pub code_version: String,
    pub prng: String,
    pub started_at: String,
    pub updated_at: String,
    pub finished_at: Option<String>,
    pub status: RunStatus,
    pub config: ExperimentConfig,
    /// Tasks whose outputs are all written, in completion order.
    pub completed_tasks: Vec<String>,
    pub outputs: Vec<OutputFile>,
    pub error: Option<String>,
}

fn now() -> String {
    chrono::Utc::now().to_rfc3339_opts(chrono::SecondsFormat::Millis, true)
}

impl RunManifest {
    pub fn new(config: &ExperimentConfig) -> Self {
        let t = now();
        Self {
            protocol: config.protocol,
            config_hash: config.hash(),
            code_version: CODE_VERSION.to_string(),
            prng: PRNG_ALGORITHM.to_string(),
            started_at: t.clone(),
            updated_at: t,
            finished_at: None,
            status: RunStatus::Running,
            config: config.clone(),
            completed_tasks: Vec::new(),
            outputs: Vec::new(),
            error: None,
        }
    }

    pub fn load(path: &Path) -> CliResult<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        if text.trim().is_empty() {
            return Err(CliError::Validation(vec![format!(
                "{}: manifest is empty",
                path.display()
            )]));
        }
        read_json(path)
    }

    pub fn save(&mut self, dir: &Path) -> CliResult<()> {
        self.updated_at = now();
        write_json(&dir.join(MANIFEST_FILE), self)
    }

    pub fn is_done(&self, task: &str) -> bool {
        self.completed_tasks.iter().any(|t| t == task)
    }

    /// Records `task` with the files it wrote, replacing any earlier
    /// record of the same task.
    pub fn complete_task(&mut self, dir: &Path, task: &str, files: &[PathBuf]) -> CliResult<()> {
        self.outputs.retain(|o| o.task != task);
        for f in files {
            self.outputs.push(OutputFile {
                path: f.clone(),
                sha256: sha256_file(&dir.join(f))?,
                task: task.to_string(),
            });
        }
        if !self.is_done(task) {
            self.completed_tasks.push(task.to_string());
        }
        self.save(dir)
    }

    pub fn finish(&mut self, dir: &Path, result: &CliResult<()>) -> CliResult<()> {
        match result {
            Ok(()) => {
                self.status = RunStatus::Complete;
                self.error = None;
            }
            Err(e) => {
                self.status = RunStatus::Failed;
                self.error = Some(e.to_string());
            }
        }
        self.finished_at = Some(now());
        self.save(dir)
    }

    /// Drops completed tasks whose outputs are missing or changed on disk.
    pub fn prune_stale(&mut self, dir: &Path) {
        let stale: Vec<String> = self
            .outputs
            .iter()
            .filter(|o| sha256_file(&dir.join(&o.path)).map_or(true, |h| h != o.sha256))
            .map(|o| o.task.clone())
            .collect();
        self.completed_tasks.retain(|t| !stale.contains(t));
        self.outputs.retain(|o| !stale.contains(&o.task));
    }

    /// Every output that is missing or whose digest no longer matches.
    pub fn check_outputs(&self, dir: &Path) -> Vec<String> {
        self.outputs
            .iter()
            .filter_map(|o| match sha256_file(&dir.join(&o.path)) {
                Err(_) => Some(format!("{}: missing", o.path.display())),
                Ok(h) if h != o.sha256 => Some(format!("{}: digest mismatch", o.path.display())),
                Ok(_) => None,
            })
            .collect()
    }

    pub fn output(&self, name: &str) -> Option<&OutputFile> {
        self.outputs.iter().find(|o| o.path == Path::new(name))
    }
}
