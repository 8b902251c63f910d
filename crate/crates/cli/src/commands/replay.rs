//! `replay`: re-executes a run from its manifest and diffs the metric tables.

use std::path::{Path, PathBuf};

use chiplet_place::model::load_benchmark;

use super::{create_dir, fresh_dir, run_job};
use crate::error::{CliError, CliResult};
use crate::manifest::{RunManifest, Status};

#[derive(Debug)]
pub struct ReplayReport {
    pub out: PathBuf,
    pub compared: Vec<String>,
    pub mismatched: Vec<String>,
}

impl ReplayReport {
    pub fn identical(&self) -> bool {
        self.mismatched.is_empty()
    }
}

pub fn replay(run: &Path, out: Option<&Path>) -> CliResult<ReplayReport> {
    let manifest = RunManifest::read(run)?;
    if manifest.status != Status::Complete {
        return Err(CliError::Config(format!("{} is not a complete run", run.display())));
    }
    let config = load_benchmark(&manifest.benchmark_toml)?;
    if config.digest() != manifest.benchmark.digest {
        return Err(CliError::Config(format!(
            "{}: embedded benchmark does not match its recorded digest",
            run.display()
        )));
    }
    let out = match out {
        Some(p) => p.to_path_buf(),
        None => fresh_dir(run, "replay"),
    };
    create_dir(&out)?;
    let written = run_job(&out, &manifest.job, &config)?;

    let mut mismatched = Vec::new();
    for rel in &manifest.metric_files {
        let a = std::fs::read(run.join(rel)).ok();
        let b = std::fs::read(out.join(rel)).ok();
        if a.is_none() || a != b {
            mismatched.push(rel.clone());
        }
    }
    for rel in &written.metrics {
        if !manifest.metric_files.contains(rel) {
            mismatched.push(rel.clone());
        }
    }
    Ok(ReplayReport {
        out,
        compared: manifest.metric_files,
        mismatched,
    })
}
