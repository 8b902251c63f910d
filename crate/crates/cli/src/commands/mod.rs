//! Subcommand implementations.
//!
//! Every run-producing command builds a [`Job`], creates a run directory,
//! writes an incomplete manifest, executes the job and then marks the
//! manifest complete. `replay` re-executes the same job from the manifest.

pub mod calibrate;
pub mod pareto;
pub mod render;
pub mod replay;
pub mod rl;
pub mod search;

use std::path::{Path, PathBuf};

use chiplet_place::model::{emit_benchmark, BenchmarkConfig};

use crate::error::{io_err, CliError, CliResult};
use crate::manifest::{now_unix, BenchmarkInfo, Job, RunManifest, Status, MANIFEST_FILE, MANIFEST_FORMAT_VERSION};

/// Environment variable naming the default output root.
pub const OUT_ROOT_ENV: &str = "CHIPLET_PLACE_OUT";
const DEFAULT_OUT_ROOT: &str = "runs";

/// Files written by a job, relative to its directory.
#[derive(Debug, Default)]
pub struct Written {
    pub artifacts: Vec<String>,
    /// Deterministic tables compared on replay.
    pub metrics: Vec<String>,
}

impl Written {
    fn artifact(&mut self, rel: impl Into<String>) {
        self.artifacts.push(rel.into());
    }

    fn metric(&mut self, rel: impl Into<String>) {
        let rel = rel.into();
        self.artifacts.push(rel.clone());
        self.metrics.push(rel);
    }
}

pub fn out_root() -> PathBuf {
    std::env::var_os(OUT_ROOT_ENV)
        .map(PathBuf::from)
        .unwrap_or_else(|| PathBuf::from(DEFAULT_OUT_ROOT))
}

pub(crate) fn create_dir(path: &Path) -> CliResult<()> {
    std::fs::create_dir_all(path).map_err(|e| io_err(path, e))
}

pub(crate) fn write_file(path: &Path, text: impl AsRef<[u8]>) -> CliResult<()> {
    if let Some(parent) = path.parent() {
        create_dir(parent)?;
    }
    std::fs::write(path, text).map_err(|e| io_err(path, e))
}

/// Picks `root/stem`, or `root/stem-2`, `-3`, ... if taken.
pub fn fresh_dir(root: &Path, stem: &str) -> PathBuf {
    let mut dir = root.join(stem);
    let mut k = 2;
    while dir.exists() {
        dir = root.join(format!("{stem}-{k}"));
        k += 1;
    }
    dir
}

/// Resolves the run directory: `--out` verbatim (refusing to overwrite a
/// previous run) or a fresh directory under the output root.
pub fn run_dir(out: Option<&Path>, job: &Job, bench: &str) -> CliResult<PathBuf> {
    let dir = match out {
        Some(p) => {
            if p.join(MANIFEST_FILE).exists() {
                return Err(CliError::Config(format!(
                    "{} already holds a run; choose another --out",
                    p.display()
                )));
            }
            p.to_path_buf()
        }
        None => {
            let seed = job.seeds().first().copied().unwrap_or(0);
            fresh_dir(&out_root(), &format!("{}-{bench}-s{seed}", job.method()))
        }
    };
    create_dir(&dir)?;
    Ok(dir)
}

/// Runs `job` into `dir`, maintaining the manifest around it.
pub fn execute_run(dir: &Path, job: Job, config: &BenchmarkConfig, source: &str) -> CliResult<RunManifest> {
    let mut manifest = RunManifest {
        format_version: MANIFEST_FORMAT_VERSION,
        tool_version: env!("CARGO_PKG_VERSION").to_string(),
        status: Status::Incomplete,
        benchmark: BenchmarkInfo {
            name: config.name.clone(),
            source: source.to_string(),
            digest: config.digest(),
            grid_n: config.grid_n,
        },
        benchmark_toml: emit_benchmark(config),
        seeds: job.seeds(),
        job,
        started_unix: now_unix(),
        finished_unix: None,
        artifacts: Vec::new(),
        metric_files: Vec::new(),
        error: None,
    };
    manifest.write(dir)?;
    match run_job(dir, &manifest.job, config) {
        Ok(w) => {
            manifest.status = Status::Complete;
            manifest.finished_unix = Some(now_unix());
            manifest.artifacts = w.artifacts;
            manifest.metric_files = w.metrics;
            manifest.write(dir)?;
            Ok(manifest)
        }
        Err(e) => {
            manifest.error = Some(e.to_string());
            manifest.write(dir)?;
            Err(e)
        }
    }
}

/// Executes a job without touching the manifest.
pub fn run_job(dir: &Path, job: &Job, config: &BenchmarkConfig) -> CliResult<Written> {
    match job {
        Job::Marl { train, eval_episodes } => {
            rl::run(dir, config, train, chiplet_place::env::EnvMode::Navigator, *eval_episodes, job.method())
        }
        Job::SingleRl {
            train,
            eval_episodes,
            wire_weight,
            thermal_weight,
        } => {
            let mode = chiplet_place::env::EnvMode::SingleAgent {
                wire_weight: *wire_weight,
                thermal_weight: *thermal_weight,
                zero_thermal_channels: false,
            };
            rl::run(dir, config, train, mode, *eval_episodes, job.method())
        }
        Job::Sa { sweep } => search::run_sa(dir, config, sweep),
        Job::Random { budget, seed } => search::run_random(dir, config, *budget, *seed),
    }
}

/// Stem used in run directory names.
pub fn bench_stem(config: &BenchmarkConfig) -> String {
    config
        .name
        .chars()
        .map(|c| if c.is_ascii_alphanumeric() || c == '-' { c } else { '_' })
        .collect()
}
