//! Hidden `calibrate-thermal`: fits conductances to a target mean hotspot
//! over random legal layouts and writes a benchmark copy.

use std::path::Path;

use chiplet_place::baselines::random_search;
use chiplet_place::model::{emit_benchmark, BenchmarkConfig, ThermalParams};
use chiplet_place::thermal::calibrate_conductances;

use super::write_file;
use crate::error::CliResult;

pub fn calibrate(
    mut config: BenchmarkConfig,
    target: f64,
    layouts: usize,
    seed: u64,
    out: &Path,
) -> CliResult<ThermalParams> {
    let sample = random_search(&config, layouts, seed)?;
    let states: Vec<_> = sample.points.into_iter().map(|e| e.state).collect();
    let params = calibrate_conductances(&config, &states, target)?;
    config.thermal = params;
    write_file(out, emit_benchmark(&config))?;
    Ok(params)
}
