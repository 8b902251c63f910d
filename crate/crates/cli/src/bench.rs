//! Benchmark argument resolution.

use std::path::{Path, PathBuf};

use chiplet_place::model::{load_benchmark, load_benchmark_file, presets, BenchmarkConfig};

use crate::error::{CliError, CliResult};

/// A loaded benchmark and where it came from.
#[derive(Debug, Clone)]
pub struct Resolved {
    pub config: BenchmarkConfig,
    pub source: String,
}

/// Accepts a file path, the same path without `.toml`, or the name of a
/// shipped preset (optionally prefixed with `presets/`).
pub fn resolve(arg: &str) -> CliResult<Resolved> {
    let path = PathBuf::from(arg);
    let with_ext = PathBuf::from(format!("{arg}.toml"));
    for p in [&path, &with_ext] {
        if p.is_file() {
            return Ok(Resolved {
                config: load_benchmark_file(p)?,
                source: p.display().to_string(),
            });
        }
    }
    let name = Path::new(arg)
        .file_name()
        .and_then(|s| s.to_str())
        .map(|s| s.trim_end_matches(".toml"))
        .unwrap_or(arg);
    let looks_like_preset = path.parent().is_none_or(|p| p.as_os_str().is_empty() || p.ends_with("presets"));
    if looks_like_preset {
        if let Some(src) = presets::source(name) {
            return Ok(Resolved {
                config: load_benchmark(src)?,
                source: format!("preset:{name}"),
            });
        }
    }
    Err(CliError::Config(format!("benchmark not found: {arg}")))
}

/// Applies a `--grid-n` override.
pub fn with_grid(config: BenchmarkConfig, grid_n: Option<usize>) -> CliResult<BenchmarkConfig> {
    match grid_n {
        Some(n) => Ok(config.with_grid_n(n)?),
        None => Ok(config),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn preset_names_resolve() {
        for arg in ["cpu-dram", "presets/cpu-dram", "presets/multi-gpu.toml"] {
            let r = resolve(arg).unwrap();
            assert!(r.config.chiplets.len() >= 8, "{arg}");
        }
    }

    #[test]
    fn missing_file_names_the_path() {
        let err = resolve("nowhere/bench.toml").unwrap_err();
        assert!(err.to_string().contains("nowhere/bench.toml"));
        assert_eq!(err.exit_code(), crate::error::EXIT_CONFIG);
    }
}
