//! `baseline sa` and `baseline random`.

use std::fmt::Write as _;
use std::path::Path;

use chiplet_place::analysis::{ParetoPoint, POINTS_FILE};
use chiplet_place::baselines::{random_search, sa_search, SaConfig};
use chiplet_place::grid::Layout;
use chiplet_place::io::write_csv;
use chiplet_place::model::BenchmarkConfig;
use serde::Serialize;

use super::{create_dir, write_file, Written};
use crate::error::{CliError, CliResult};

#[derive(Serialize)]
struct SaSummaryRow {
    run: String,
    seed: u64,
    w_wl: f64,
    w_temp: f64,
    initial_temp: f64,
    moves: usize,
    accepted: usize,
    initial_cost: f64,
    best_cost: f64,
    best_wl_mm: f64,
    best_temp_c: f64,
}

#[derive(Serialize)]
struct RandomRow {
    index: usize,
    wl_mm: f64,
    temp_c: f64,
}

/// Name of the sub-directory holding sweep point `i`.
pub fn sweep_dir_name(i: usize, sa: &SaConfig) -> String {
    format!("{i:02}-wt-{:.3}", sa.w_temp)
}

/// Parses `--w-temp`: a single value or an inclusive `start:stop:step` range.
pub fn parse_sweep(arg: &str) -> CliResult<Vec<f64>> {
    let bad = || CliError::Config(format!("--w-temp: expected a number or start:stop:step, got {arg:?}"));
    let parts: Vec<f64> = arg
        .split(':')
        .map(|p| p.trim().parse::<f64>().map_err(|_| bad()))
        .collect::<CliResult<_>>()?;
    match parts[..] {
        [v] => Ok(vec![v]),
        [start, stop, step] if step > 0.0 && stop >= start => {
            let n = ((stop - start) / step + 1e-9).floor() as usize;
            // Round to the step's precision so 0.1:0.9:0.1 yields 0.3, not 0.30000000000000004.
            Ok((0..=n).map(|k| ((start + k as f64 * step) * 1e9).round() / 1e9).collect())
        }
        _ => Err(bad()),
    }
}

pub fn run_sa(dir: &Path, config: &BenchmarkConfig, sweep: &[SaConfig]) -> CliResult<Written> {
    if sweep.is_empty() {
        return Err(CliError::Config("SA sweep is empty".into()));
    }
    let mut w = Written::default();
    let mut points = Vec::new();
    let mut summary = Vec::new();
    for (i, sa) in sweep.iter().enumerate() {
        let name = sweep_dir_name(i, sa);
        let sub = format!("sweep/{name}");
        create_dir(&dir.join(&sub))?;
        let r = sa_search(config, sa)?;

        let mut trace = String::new();
        for t in &r.trace {
            writeln!(trace, "{}", serde_json::to_string(t).expect("trace step serializes")).unwrap();
        }
        write_file(&dir.join(format!("{sub}/trace.jsonl")), trace)?;
        w.metric(format!("{sub}/trace.jsonl"));
        for (file, state) in [("initial.json", &r.initial), ("best.json", &r.best.state)] {
            let rel = format!("{sub}/{file}");
            write_file(&dir.join(&rel), Layout::from_state(state, config).to_json())?;
            w.metric(rel);
        }
        let rel = format!("{sub}/config.json");
        write_file(&dir.join(&rel), serde_json::to_string_pretty(sa).expect("config serializes"))?;
        w.artifact(rel);

        points.push(ParetoPoint::new("sa", sa.seed, format!("{name}/best"), r.best.wl, r.best.temp));
        summary.push(SaSummaryRow {
            run: name,
            seed: sa.seed,
            w_wl: sa.w_wl,
            w_temp: sa.w_temp,
            initial_temp: r.initial_temp,
            moves: r.trace.len(),
            accepted: r.trace.iter().filter(|t| t.accepted).count(),
            initial_cost: r.initial_cost,
            best_cost: r.best_cost,
            best_wl_mm: r.best.wl,
            best_temp_c: r.best.temp,
        });
        eprintln!(
            "[sa seed {}] w_temp {:.3}: best wl {:.1} mm, hotspot {:.2} C",
            sa.seed, sa.w_temp, r.best.wl, r.best.temp
        );
    }
    write_csv(&dir.join(POINTS_FILE), &points)?;
    w.metric(POINTS_FILE);
    write_csv(&dir.join("summary.csv"), &summary)?;
    w.metric("summary.csv");
    Ok(w)
}

pub fn run_random(dir: &Path, config: &BenchmarkConfig, budget: usize, seed: u64) -> CliResult<Written> {
    let r = random_search(config, budget, seed)?;
    let mut w = Written::default();
    let points: Vec<ParetoPoint> = r
        .points
        .iter()
        .enumerate()
        .map(|(i, e)| ParetoPoint::new("random", seed, format!("layout-{i}"), e.wl, e.temp))
        .collect();
    write_csv(&dir.join(POINTS_FILE), &points)?;
    w.metric(POINTS_FILE);
    let rows: Vec<RandomRow> = r
        .points
        .iter()
        .enumerate()
        .map(|(index, e)| RandomRow {
            index,
            wl_mm: e.wl,
            temp_c: e.temp,
        })
        .collect();
    write_csv(&dir.join("samples.csv"), &rows)?;
    w.metric("samples.csv");

    let mut lines = String::new();
    for e in &r.points {
        lines.push_str(&Layout::from_state(&e.state, config).to_json().replace('\n', ""));
        lines.push('\n');
    }
    write_file(&dir.join("layouts.jsonl"), lines)?;
    w.metric("layouts.jsonl");
    for (file, e) in [("best-wl.json", r.best_by_wl()), ("best-temp.json", r.best_by_temp())] {
        write_file(&dir.join(file), Layout::from_state(&e.state, config).to_json())?;
        w.metric(file);
    }
    eprintln!(
        "[random seed {seed}] {budget} layouts: best wl {:.1} mm, best hotspot {:.2} C",
        r.best_by_wl().wl,
        r.best_by_temp().temp
    );
    Ok(w)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sweep_ranges() {
        assert_eq!(parse_sweep("0.3").unwrap(), [0.3]);
        let s = parse_sweep("0.1:0.9:0.1").unwrap();
        assert_eq!(s.len(), 9);
        assert_eq!(s[2], 0.3);
        assert_eq!(s[8], 0.9);
        assert!(parse_sweep("0.9:0.1:0.1").is_err());
        assert!(parse_sweep("a").is_err());
        assert!(parse_sweep("0:1:0").is_err());
    }
}
