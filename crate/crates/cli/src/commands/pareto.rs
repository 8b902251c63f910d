//! `pareto`: pooled fronts, hypervolumes and an overlay figure.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use chiplet_place::analysis::{
    assemble_front, front_rows, hypervolume_2d, reference_point, MethodFront, DEFAULT_REFERENCE_MARGIN,
};
use chiplet_place::io::write_csv;
use serde::{Deserialize, Serialize};

use super::{create_dir, write_file};
use crate::error::{CliError, CliResult};
use crate::svg::pareto_svg;

pub const HYPERVOLUME_FILE: &str = "hypervolume.csv";
pub const FRONTS_FILE: &str = "fronts.csv";

/// One row of `hypervolume.csv`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HypervolumeRow {
    pub method: String,
    pub points: usize,
    pub front_size: usize,
    pub ref_wl_mm: f64,
    pub ref_temp_c: f64,
    pub hypervolume: f64,
    pub best_wl_mm: f64,
    pub best_temp_c: f64,
}

#[derive(Debug)]
pub struct ParetoOutput {
    pub methods: BTreeMap<String, MethodFront>,
    pub rows: Vec<HypervolumeRow>,
}

pub fn pareto(run_dirs: &[PathBuf], out: &Path) -> CliResult<ParetoOutput> {
    if run_dirs.is_empty() {
        return Err(CliError::Config("pareto needs at least one run directory".into()));
    }
    let methods = assemble_front(run_dirs)?;
    let reference = reference_point(methods.values().map(|m| &m.cloud[..]), DEFAULT_REFERENCE_MARGIN)
        .ok_or_else(|| CliError::Config("the run directories hold no points".into()))?;

    create_dir(out)?;
    let mut all_rows = Vec::new();
    let mut rows = Vec::new();
    for (name, m) in &methods {
        let fr = front_rows(&m.cloud);
        write_csv(&out.join(format!("front-{name}.csv")), &fr)?;
        all_rows.extend(fr);
        let min = |f: fn(&chiplet_place::analysis::ParetoPoint) -> f64| {
            m.cloud.iter().map(f).fold(f64::INFINITY, f64::min)
        };
        rows.push(HypervolumeRow {
            method: name.clone(),
            points: m.cloud.len(),
            front_size: m.front.len(),
            ref_wl_mm: reference.0,
            ref_temp_c: reference.1,
            hypervolume: hypervolume_2d(&m.cloud, reference)?,
            best_wl_mm: min(|p| p.wl_mm),
            best_temp_c: min(|p| p.temp_c),
        });
    }
    let counts: Vec<usize> = rows.iter().map(|r| r.points).collect();
    if counts.windows(2).any(|w| w[0] != w[1]) {
        eprintln!("warning: methods have unequal evaluation budgets: {counts:?}");
    }
    write_csv(&out.join(FRONTS_FILE), &all_rows)?;
    write_csv(&out.join(HYPERVOLUME_FILE), &rows)?;
    let names: Vec<&str> = methods.keys().map(String::as_str).collect();
    write_file(&out.join("pareto.svg"), pareto_svg(&methods, &names.join(" vs ")))?;
    Ok(ParetoOutput { methods, rows })
}
