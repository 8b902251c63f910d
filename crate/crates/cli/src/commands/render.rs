//! `render`: layout and thermal-map figures for one layout file.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use chiplet_place::grid::Layout;
use chiplet_place::model::BenchmarkConfig;
use chiplet_place::thermal::{thermal_field, ThermalField};
use chiplet_place::wirelength::total_hpwl;
use chiplet_place::model::Netlist;

use super::{create_dir, write_file};
use crate::error::{CliError, CliResult};
use crate::svg::{layout_svg, thermal_svg};

pub const THERMAL_GRID_FORMAT_VERSION: u32 = 1;

/// Dense temperature grid as text: a version line, a metadata comment, then
/// `grid_n` rows of `grid_n` space-separated temperatures in °C, row 0 at
/// the top of the canvas.
pub fn thermal_grid_text(config: &BenchmarkConfig, field: &ThermalField) -> String {
    let n = field.grid_n;
    let mut s = format!("# format-version={THERMAL_GRID_FORMAT_VERSION}\n");
    writeln!(
        s,
        "# grid_n={n} cell_width_mm={} cell_height_mm={} ambient_c={} hotspot_c={:.6} hotspot_row={} hotspot_col={}",
        config.cell_width(),
        config.cell_height(),
        config.thermal.ambient_temp,
        field.hotspot,
        field.hotspot_cell.row,
        field.hotspot_cell.col
    )
    .unwrap();
    for row in field.temps.chunks(n) {
        let line: Vec<String> = row.iter().map(|t| format!("{t:.6}")).collect();
        s.push_str(&line.join(" "));
        s.push('\n');
    }
    s
}

#[derive(Debug)]
pub struct Rendered {
    pub layout_svg: PathBuf,
    pub thermal_svg: PathBuf,
    pub thermal_grid: PathBuf,
    pub hotspot: f64,
    pub wirelength: f64,
}

pub fn render(layout_path: &Path, config: BenchmarkConfig, out: &Path) -> CliResult<Rendered> {
    let text = std::fs::read_to_string(layout_path)
        .map_err(|e| CliError::Config(format!("{}: {e}", layout_path.display())))?;
    let layout = Layout::from_json(&text).map_err(|e| CliError::Config(format!("{}: {e}", layout_path.display())))?;
    let config = if layout.grid_n != config.grid_n {
        config.with_grid_n(layout.grid_n)?
    } else {
        config
    };
    let state = layout.to_state(&config)?;
    let field = thermal_field(&state, &config)?;
    let wirelength = total_hpwl(&state, &config, &Netlist::new(&config));

    create_dir(out)?;
    let r = Rendered {
        layout_svg: out.join("layout.svg"),
        thermal_svg: out.join("thermal.svg"),
        thermal_grid: out.join("thermal.txt"),
        hotspot: field.hotspot,
        wirelength,
    };
    write_file(&r.layout_svg, layout_svg(&config, &state))?;
    write_file(&r.thermal_svg, thermal_svg(&config, &field))?;
    write_file(&r.thermal_grid, thermal_grid_text(&config, &field))?;
    Ok(r)
}
