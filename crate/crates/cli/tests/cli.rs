//! Command contracts: run directories, exit codes and figure contents.

use std::path::Path;

use chiplet_place::analysis::ParetoPoint;
use chiplet_place::grid::Layout;
use chiplet_place::io::read_csv;
use chiplet_place::model::presets;
use chiplet_place::thermal::hotspot;
use chiplet_place_cli::error::{EXIT_CONFIG, EXIT_DEADLOCK};
use chiplet_place_cli::manifest::{RunManifest, Status};
use chiplet_place_cli::svg::PX_PER_MM;
use serde::Deserialize;

fn cli(args: &[&str]) -> i32 {
    let mut v = vec!["chiplet-place"];
    v.extend_from_slice(args);
    chiplet_place_cli::run(v)
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

/// Numeric attribute `name="..."` of the first tag matching `tag_prefix`.
fn attr(svg: &str, tag_prefix: &str, name: &str) -> f64 {
    let tag = &svg[svg.find(tag_prefix).unwrap_or_else(|| panic!("no {tag_prefix}"))..];
    let key = format!(" {name}=\"");
    let start = tag.find(&key).unwrap() + key.len();
    tag[start..start + tag[start..].find('"').unwrap()].parse().unwrap()
}

#[test]
fn train_writes_checkpoints_and_one_log_row_per_update() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("run");
    assert_eq!(
        cli(&["train", "presets/cpu-dram", "--grid-n", "32", "--updates", "50", "--seed", "7", "--out", s(&out)]),
        0
    );
    let ckpts = std::fs::read_dir(out.join("checkpoints")).unwrap().count();
    assert!(ckpts >= 1);
    #[derive(Deserialize)]
    struct Row {
        update: usize,
    }
    let rows: Vec<Row> = read_csv(&out.join("training_log.csv")).unwrap();
    assert_eq!(rows.len(), 50);
    assert_eq!(rows.last().unwrap().update, 49);
    let m = RunManifest::read(&out).unwrap();
    assert_eq!(m.status, Status::Complete);
    assert_eq!(m.seeds, [7]);
    assert!(out.join("traces/greedy-final.csv").is_file());
    assert!(out.join("layouts/ckpt-000050-greedy.json").is_file());
    // Refuses to overwrite a finished run.
    assert_eq!(cli(&["train", "cpu-dram", "--updates", "1", "--out", s(&out)]), EXIT_CONFIG);
}

#[test]
fn missing_benchmark_is_a_config_error() {
    assert_eq!(cli(&["train", "no/such/bench.toml", "--updates", "1"]), EXIT_CONFIG);
    let err = chiplet_place_cli::bench::resolve("no/such/bench.toml").unwrap_err();
    assert!(err.to_string().contains("no/such/bench.toml"));
}

#[test]
fn bad_train_config_names_the_file_and_line() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("tc.toml");
    std::fs::write(&cfg, "seed = 1\nlearning_rat = 0.1\n").unwrap();
    assert_eq!(cli(&["train", "cpu-dram", "--config", s(&cfg), "--out", s(&dir.path().join("r"))]), EXIT_CONFIG);
}

#[test]
fn infeasible_benchmark_exits_with_deadlock_code() {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = presets::cpu_dram();
    // Shrink the canvas until the chiplets cannot all fit.
    cfg.canvas_width = 26.0;
    cfg.canvas_height = 26.0;
    let path = dir.path().join("tight.toml");
    std::fs::write(&path, chiplet_place::model::emit_benchmark(&cfg)).unwrap();
    let out = dir.path().join("r");
    let code = cli(&["baseline", "random", s(&path), "--grid-n", "16", "--budget", "1", "--out", s(&out)]);
    assert_eq!(code, EXIT_DEADLOCK);
    let m = RunManifest::read(&out).unwrap();
    assert_eq!(m.status, Status::Incomplete);
    assert!(m.error.is_some());
}

#[test]
fn sa_single_weight_and_sweep() {
    let dir = tempfile::tempdir().unwrap();
    let one = dir.path().join("one");
    assert_eq!(
        cli(&["baseline", "sa", "presets/multi-gpu", "--grid-n", "16", "--w-temp", "0.3", "--w-wl", "0.7",
              "--max-moves", "200", "--out", s(&one)]),
        0
    );
    let sub = one.join("sweep/00-wt-0.300");
    assert!(sub.join("trace.jsonl").is_file());
    let best = Layout::from_json(&std::fs::read_to_string(sub.join("best.json")).unwrap()).unwrap();
    assert_eq!(best.placements.len(), presets::multi_gpu().chiplets.len());

    let sweep = dir.path().join("sweep");
    assert_eq!(
        cli(&["baseline", "sa", "multi-gpu", "--grid-n", "16", "--w-temp", "0.1:0.9:0.1", "--max-moves", "50",
              "--out", s(&sweep)]),
        0
    );
    let runs = std::fs::read_dir(sweep.join("sweep")).unwrap().count();
    assert_eq!(runs, 9);
    let points: Vec<ParetoPoint> = read_csv(&sweep.join("points.csv")).unwrap();
    assert_eq!(points.len(), 9);
}

#[test]
fn random_budget_records_every_legal_layout() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("r");
    assert_eq!(cli(&["baseline", "random", "presets/multi-gpu", "--budget", "1000", "--out", s(&out)]), 0);
    let cfg = presets::multi_gpu();
    let text = std::fs::read_to_string(out.join("layouts.jsonl")).unwrap();
    let mut count = 0;
    for line in text.lines() {
        let state = Layout::from_json(line).unwrap().to_state(&cfg).unwrap();
        assert_eq!(state.placed().len(), cfg.chiplets.len());
        assert!(state.overlapping_pairs().is_empty());
        count += 1;
    }
    assert_eq!(count, 1000);
}

#[test]
fn render_empty_layout_is_blank_and_ambient() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = presets::cpu_dram();
    let empty = Layout {
        format_version: chiplet_place::grid::LAYOUT_FORMAT_VERSION,
        benchmark: cfg.name.clone(),
        grid_n: cfg.grid_n,
        placements: vec![],
    };
    let lp = dir.path().join("empty.json");
    std::fs::write(&lp, empty.to_json()).unwrap();
    let out = dir.path().join("fig");
    assert_eq!(cli(&["render", s(&lp), "cpu-dram", "--out", s(&out)]), 0);
    let layout = std::fs::read_to_string(out.join("layout.svg")).unwrap();
    assert!(!layout.contains("class=\"chiplet\""));
    let thermal = std::fs::read_to_string(out.join("thermal.svg")).unwrap();
    assert_eq!(attr(&thermal, "<svg", "data-hotspot-c"), cfg.thermal.ambient_temp);
    let grid = std::fs::read_to_string(out.join("thermal.txt")).unwrap();
    assert!(grid.starts_with("# format-version=1\n"));
    for line in grid.lines().skip(2) {
        for t in line.split_whitespace() {
            assert_eq!(t.parse::<f64>().unwrap(), cfg.thermal.ambient_temp);
        }
    }
}

#[test]
fn render_scales_rectangles_and_annotates_hotspot() {
    let dir = tempfile::tempdir().unwrap();
    let run = dir.path().join("r");
    assert_eq!(cli(&["baseline", "random", "cpu-dram", "--budget", "1", "--seed", "5", "--out", s(&run)]), 0);
    let out = dir.path().join("fig");
    assert_eq!(cli(&["render", s(&run.join("best-wl.json")), "cpu-dram", "--out", s(&out)]), 0);

    let cfg = presets::cpu_dram();
    let layout = Layout::from_json(&std::fs::read_to_string(run.join("best-wl.json")).unwrap()).unwrap();
    let svg = std::fs::read_to_string(out.join("layout.svg")).unwrap();
    for e in &layout.placements {
        let c = &cfg.chiplets[cfg.chiplet_index(&e.chiplet).unwrap()];
        let (w, h) = c.oriented_dims(e.orientation);
        let tag = format!("data-id=\"{}\"", e.chiplet);
        let i = svg.find(&tag).unwrap();
        let start = svg[..i].rfind("<rect").unwrap();
        let rect = &svg[start..];
        assert!((attr(rect, "<rect", "width") - w * PX_PER_MM).abs() < 0.01);
        assert!((attr(rect, "<rect", "height") - h * PX_PER_MM).abs() < 0.01);
    }

    let state = layout.to_state(&cfg).unwrap();
    let thermal = std::fs::read_to_string(out.join("thermal.svg")).unwrap();
    assert!((attr(&thermal, "<svg", "data-hotspot-c") - hotspot(&state, &cfg).unwrap()).abs() < 0.1);
    assert!(thermal.contains("class=\"scale\""));
    assert!(thermal.contains("class=\"hotspot\""));
}

#[test]
fn pareto_singleton_and_legend() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a");
    let b = dir.path().join("b");
    assert_eq!(cli(&["baseline", "random", "cpu-dram", "--grid-n", "16", "--budget", "1", "--out", s(&a)]), 0);
    assert_eq!(
        cli(&["baseline", "sa", "cpu-dram", "--grid-n", "16", "--max-moves", "50", "--out", s(&b)]),
        0
    );
    let one = dir.path().join("p1");
    assert_eq!(cli(&["pareto", s(&a), "--out", s(&one)]), 0);
    #[derive(Deserialize)]
    struct Row {
        dominated: bool,
    }
    let rows: Vec<Row> = read_csv(&one.join("front-random.csv")).unwrap();
    assert_eq!(rows.len(), 1);
    assert!(!rows[0].dominated);

    let both = dir.path().join("p2");
    assert_eq!(cli(&["pareto", s(&a), s(&b), "--out", s(&both)]), 0);
    let svg = std::fs::read_to_string(both.join("pareto.svg")).unwrap();
    assert!(svg.contains("data-method=\"random\""));
    assert!(svg.contains("data-method=\"sa\""));
    assert_eq!(svg.matches("class=\"legend\"").count(), 2);
}

#[test]
fn calibrate_thermal_hits_its_target() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("cal.toml");
    assert_eq!(
        cli(&["calibrate-thermal", "cpu-dram", "--grid-n", "16", "--target", "95", "--layouts", "8", "--out", s(&out)]),
        0
    );
    let cfg = chiplet_place::model::load_benchmark_file(&out).unwrap();
    let sample = chiplet_place::baselines::random_search(&cfg, 8, 0).unwrap();
    let mean = sample.points.iter().map(|e| e.temp).sum::<f64>() / 8.0;
    assert!((mean - 95.0).abs() < 1e-6, "{mean}");
}
