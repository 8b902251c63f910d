//! Run manifest: everything needed to re-execute a run.

use std::path::Path;
use std::time::{SystemTime, UNIX_EPOCH};

use chiplet_place::agents::TrainConfig;
use chiplet_place::baselines::SaConfig;
use serde::{Deserialize, Serialize};

use crate::error::{io_err, CliError, CliResult};

pub const MANIFEST_FILE: &str = "manifest.json";
pub const MANIFEST_FORMAT_VERSION: u32 = 1;

/// What a run executes. Serialized into the manifest.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "method", rename_all = "kebab-case")]
pub enum Job {
    Marl {
        train: TrainConfig,
        eval_episodes: usize,
    },
    SingleRl {
        train: TrainConfig,
        eval_episodes: usize,
        wire_weight: f64,
        thermal_weight: f64,
    },
    Sa {
        sweep: Vec<SaConfig>,
    },
    Random {
        budget: usize,
        seed: u64,
    },
}

impl Job {
    /// Method tag written into every output row.
    pub fn method(&self) -> &'static str {
        match self {
            Job::Marl { .. } => "marl",
            Job::SingleRl { .. } => "single-rl",
            Job::Sa { .. } => "sa",
            Job::Random { .. } => "random",
        }
    }

    pub fn seeds(&self) -> Vec<u64> {
        match self {
            Job::Marl { train, .. } | Job::SingleRl { train, .. } => vec![train.seed],
            Job::Sa { sweep } => {
                let mut s: Vec<u64> = sweep.iter().map(|c| c.seed).collect();
                s.dedup();
                s
            }
            Job::Random { seed, .. } => vec![*seed],
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Incomplete,
    Complete,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchmarkInfo {
    pub name: String,
    pub source: String,
    pub digest: String,
    pub grid_n: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub format_version: u32,
    pub tool_version: String,
    pub status: Status,
    pub benchmark: BenchmarkInfo,
    /// Full benchmark document, so the run can be replayed without the
    /// original file.
    pub benchmark_toml: String,
    pub job: Job,
    pub seeds: Vec<u64>,
    pub started_unix: u64,
    pub finished_unix: Option<u64>,
    /// Files (relative to the run directory) produced by the run.
    pub artifacts: Vec<String>,
    /// Tables compared by `replay`.
    pub metric_files: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

pub fn now_unix() -> u64 {
    SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0)
}

impl RunManifest {
    pub fn write(&self, dir: &Path) -> CliResult<()> {
        let path = dir.join(MANIFEST_FILE);
        let text = serde_json::to_string_pretty(self).expect("manifest serializes");
        std::fs::write(&path, text + "\n").map_err(|e| io_err(&path, e))
    }

    pub fn read(dir: &Path) -> CliResult<Self> {
        let path = dir.join(MANIFEST_FILE);
        let text = std::fs::read_to_string(&path).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
        let m: RunManifest =
            serde_json::from_str(&text).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
        if m.format_version != MANIFEST_FORMAT_VERSION {
            return Err(CliError::Config(format!(
                "{}: unsupported manifest version {}",
                path.display(),
                m.format_version
            )));
        }
        Ok(m)
    }
}
