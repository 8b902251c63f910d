//! Domain types and benchmark configuration.
//!
//! A benchmark is stored as a small TOML document. Chiplets are declared by
//! type with a multiplicity; a type `CPU` with `count = 4` expands to the
//! chiplets `CPU0`..`CPU3`, while `count = 1` keeps the bare type name.

use std::collections::{BTreeMap, HashMap, HashSet};
use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};

pub const BENCHMARK_FORMAT_VERSION: u32 = 1;

/// Side of the default square canvas relative to the side of a square with
/// the total chiplet area.
pub const DEFAULT_CANVAS_FACTOR: f64 = 1.35;
pub const DEFAULT_GRID_N: usize = 64;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Chiplet {
    pub id: String,
    /// Type name the chiplet was expanded from.
    pub kind: String,
    /// mm
    pub width: f64,
    /// mm
    pub height: f64,
    /// W
    pub tdp: f64,
    pub rotatable: bool,
}

impl Chiplet {
    pub fn area(&self) -> f64 {
        self.width * self.height
    }

    /// Width and height in mm under `orientation`.
    pub fn oriented_dims(&self, orientation: Orientation) -> (f64, f64) {
        match orientation {
            Orientation::R0 => (self.width, self.height),
            Orientation::R90 => (self.height, self.width),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Net {
    pub id: String,
    pub endpoints: Vec<String>,
    pub weight: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ThermalParams {
    /// °C
    pub ambient_temp: f64,
    /// W/K between 4-neighbour cells.
    pub lateral_conductance: f64,
    /// W/K from each cell to ambient.
    pub vertical_conductance: f64,
}

impl ThermalParams {
    pub fn validate(&self, path: &str) -> Result<()> {
        if !self.ambient_temp.is_finite() {
            return Err(Error::config(format!("{path}.ambient_temp"), "must be finite"));
        }
        for (name, g) in [
            ("lateral_conductance", self.lateral_conductance),
            ("vertical_conductance", self.vertical_conductance),
        ] {
            if !(g.is_finite() && g > 0.0) {
                return Err(Error::config(
                    format!("{path}.{name}"),
                    "must be strictly positive and finite",
                ));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Orientation {
    R0,
    R90,
}

impl Orientation {
    pub const ALL: [Orientation; 2] = [Orientation::R0, Orientation::R90];

    pub fn index(self) -> usize {
        match self {
            Orientation::R0 => 0,
            Orientation::R90 => 1,
        }
    }

    pub fn toggled(self) -> Self {
        match self {
            Orientation::R0 => Orientation::R90,
            Orientation::R90 => Orientation::R0,
        }
    }
}

impl std::fmt::Display for Orientation {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Orientation::R0 => "R0",
            Orientation::R90 => "R90",
        })
    }
}

impl std::str::FromStr for Orientation {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s {
            "R0" => Ok(Orientation::R0),
            "R90" => Ok(Orientation::R90),
            other => Err(format!("unknown orientation {other:?}")),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BenchmarkConfig {
    pub name: String,
    /// mm
    pub canvas_width: f64,
    /// mm
    pub canvas_height: f64,
    pub grid_n: usize,
    pub chiplets: Vec<Chiplet>,
    pub nets: Vec<Net>,
    /// W; chiplets at or above it go to the thermal agent.
    pub tdp_threshold: f64,
    pub thermal: ThermalParams,
    /// Minimum clearance between chiplets, in cells.
    pub spacing: usize,
}

impl BenchmarkConfig {
    pub fn cell_width(&self) -> f64 {
        self.canvas_width / self.grid_n as f64
    }

    pub fn cell_height(&self) -> f64 {
        self.canvas_height / self.grid_n as f64
    }

    pub fn chiplet_index(&self, id: &str) -> Option<usize> {
        self.chiplets.iter().position(|c| c.id == id)
    }

    pub fn total_tdp(&self) -> f64 {
        self.chiplets.iter().map(|c| c.tdp).sum()
    }

    /// Checks every invariant of the configuration.
    pub fn validate(&self) -> Result<()> {
        if self.grid_n < 2 {
            return Err(Error::config("grid_n", "must be at least 2"));
        }
        for (name, v) in [("canvas_width", self.canvas_width), ("canvas_height", self.canvas_height)] {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::config(name, "must be strictly positive and finite"));
            }
        }
        if !self.tdp_threshold.is_finite() {
            return Err(Error::config("tdp_threshold", "must be finite"));
        }
        self.thermal.validate("thermal")?;
        if self.chiplets.is_empty() {
            return Err(Error::config("chiplet_types", "at least one chiplet is required"));
        }

        let mut seen = HashSet::new();
        for (i, c) in self.chiplets.iter().enumerate() {
            let path = format!("chiplets[{i}]");
            if !seen.insert(c.id.as_str()) {
                return Err(Error::config(format!("{path}.id"), format!("duplicate chiplet id {:?}", c.id)));
            }
            if !(c.width.is_finite() && c.width > 0.0) {
                return Err(Error::config(format!("{path}.width"), "must be strictly positive and finite"));
            }
            if !(c.height.is_finite() && c.height > 0.0) {
                return Err(Error::config(format!("{path}.height"), "must be strictly positive and finite"));
            }
            if !(c.tdp.is_finite() && c.tdp >= 0.0) {
                return Err(Error::config(format!("{path}.tdp"), "must be non-negative and finite"));
            }
            let orientations: &[Orientation] = if c.rotatable { &Orientation::ALL } else { &[Orientation::R0] };
            for &o in orientations {
                crate::grid::cells_of(c, o, self)?;
            }
        }

        for (i, net) in self.nets.iter().enumerate() {
            let path = format!("nets[{i}]");
            if !(net.weight.is_finite() && net.weight >= 0.0) {
                return Err(Error::config(format!("{path}.weight"), "must be non-negative and finite"));
            }
            let mut distinct = HashSet::new();
            for (j, ep) in net.endpoints.iter().enumerate() {
                if self.chiplet_index(ep).is_none() {
                    return Err(Error::config(
                        format!("{path}.endpoints[{j}]"),
                        format!("unknown endpoint {ep:?}"),
                    ));
                }
                if !distinct.insert(ep.as_str()) {
                    return Err(Error::config(
                        format!("{path}.endpoints[{j}]"),
                        format!("endpoint {ep:?} listed twice"),
                    ));
                }
            }
            if distinct.len() < 2 {
                return Err(Error::config(
                    format!("{path}.endpoints"),
                    "a net needs at least two distinct endpoints",
                ));
            }
        }
        Ok(())
    }

    /// Same design on a different grid resolution.
    ///
    /// Vertical conductance is per cell and scales with cell area, so it is
    /// rescaled by `(old_n / new_n)^2`. Lateral conductance between square
    /// neighbours does not depend on cell size and is kept.
    pub fn with_grid_n(&self, grid_n: usize) -> Result<Self> {
        let mut out = self.clone();
        let ratio = self.grid_n as f64 / grid_n as f64;
        out.grid_n = grid_n;
        out.thermal.vertical_conductance *= ratio * ratio;
        out.validate()?;
        Ok(out)
    }

    /// Hex SHA-256 of the canonical TOML emission.
    pub fn digest(&self) -> String {
        sha256_hex(emit_benchmark(self).as_bytes())
    }
}

pub(crate) fn sha256_hex(bytes: &[u8]) -> String {
    let digest = Sha256::digest(bytes);
    digest.iter().map(|b| format!("{b:02x}")).collect()
}

/// Nets resolved to chiplet indices, plus the reverse map.
#[derive(Debug, Clone, PartialEq)]
pub struct Netlist {
    pub members: Vec<Vec<usize>>,
    pub weights: Vec<f64>,
    /// Net indices touching each chiplet.
    pub by_chiplet: Vec<Vec<usize>>,
}

impl Netlist {
    pub fn new(config: &BenchmarkConfig) -> Self {
        let index: HashMap<&str, usize> = config
            .chiplets
            .iter()
            .enumerate()
            .map(|(i, c)| (c.id.as_str(), i))
            .collect();
        let mut by_chiplet = vec![Vec::new(); config.chiplets.len()];
        let mut members = Vec::with_capacity(config.nets.len());
        for (n, net) in config.nets.iter().enumerate() {
            let m: Vec<usize> = net.endpoints.iter().filter_map(|e| index.get(e.as_str()).copied()).collect();
            for &c in &m {
                by_chiplet[c].push(n);
            }
            members.push(m);
        }
        Netlist {
            members,
            weights: config.nets.iter().map(|n| n.weight).collect(),
            by_chiplet,
        }
    }

    pub fn max_degree(&self) -> usize {
        self.members.iter().map(Vec::len).max().unwrap_or(0)
    }

    pub fn max_weight(&self) -> f64 {
        self.weights.iter().copied().fold(0.0, f64::max)
    }
}

/// Chiplet indices sorted by TDP descending, then area descending, then id.
pub fn placement_order(config: &BenchmarkConfig) -> Vec<usize> {
    let mut order: Vec<usize> = (0..config.chiplets.len()).collect();
    order.sort_by(|&a, &b| {
        let (ca, cb) = (&config.chiplets[a], &config.chiplets[b]);
        cb.tdp
            .total_cmp(&ca.tdp)
            .then(cb.area().total_cmp(&ca.area()))
            .then_with(|| ca.id.cmp(&cb.id))
    });
    order
}

pub fn placement_order_ids(config: &BenchmarkConfig) -> Vec<String> {
    placement_order(config)
        .into_iter()
        .map(|i| config.chiplets[i].id.clone())
        .collect()
}

/// Side of the default square canvas for a set of chiplets.
pub fn default_canvas_side(chiplets: &[Chiplet]) -> f64 {
    let area: f64 = chiplets.iter().map(Chiplet::area).sum();
    DEFAULT_CANVAS_FACTOR * area.sqrt()
}

// ---------------------------------------------------------------------------
// Persistence

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct BenchmarkDoc {
    format_version: u32,
    name: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    canvas_width: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    canvas_height: Option<f64>,
    #[serde(default = "default_grid_n")]
    grid_n: usize,
    tdp_threshold: f64,
    #[serde(default)]
    spacing: usize,
    thermal: ThermalParams,
    chiplet_types: Vec<ChipletTypeDoc>,
    #[serde(default)]
    nets: Vec<NetDoc>,
}

fn default_grid_n() -> usize {
    DEFAULT_GRID_N
}

fn default_count() -> usize {
    1
}

fn default_true() -> bool {
    true
}

fn default_weight() -> f64 {
    1.0
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ChipletTypeDoc {
    name: String,
    width: f64,
    height: f64,
    tdp: f64,
    #[serde(default = "default_count")]
    count: usize,
    #[serde(default = "default_true")]
    rotatable: bool,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct NetDoc {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    id: Option<String>,
    endpoints: Vec<String>,
    #[serde(default = "default_weight")]
    weight: f64,
    /// Reserved: per-endpoint pin offsets in mm. Parsed and ignored; nets
    /// attach to chiplet centres.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pin_offsets: Option<Vec<[f64; 2]>>,
}

/// Parses and validates a benchmark document.
pub fn load_benchmark(source: &str) -> Result<BenchmarkConfig> {
    let doc: BenchmarkDoc = toml::from_str(source).map_err(|e| Error::config("<document>", e.to_string().trim_end()))?;
    if doc.format_version != BENCHMARK_FORMAT_VERSION {
        return Err(Error::config(
            "format_version",
            format!("unsupported version {} (expected {BENCHMARK_FORMAT_VERSION})", doc.format_version),
        ));
    }

    let mut chiplets = Vec::new();
    for (i, t) in doc.chiplet_types.iter().enumerate() {
        if t.count == 0 {
            return Err(Error::config(format!("chiplet_types[{i}].count"), "must be at least 1"));
        }
        for k in 0..t.count {
            let id = if t.count == 1 { t.name.clone() } else { format!("{}{k}", t.name) };
            chiplets.push(Chiplet {
                id,
                kind: t.name.clone(),
                width: t.width,
                height: t.height,
                tdp: t.tdp,
                rotatable: t.rotatable,
            });
        }
    }

    let nets = doc
        .nets
        .into_iter()
        .enumerate()
        .map(|(i, n)| Net {
            id: n.id.unwrap_or_else(|| format!("net{i}")),
            endpoints: n.endpoints,
            weight: n.weight,
        })
        .collect();

    let side = default_canvas_side(&chiplets);
    let config = BenchmarkConfig {
        name: doc.name,
        canvas_width: doc.canvas_width.unwrap_or(side),
        canvas_height: doc.canvas_height.unwrap_or(side),
        grid_n: doc.grid_n,
        chiplets,
        nets,
        tdp_threshold: doc.tdp_threshold,
        thermal: doc.thermal,
        spacing: doc.spacing,
    };
    config.validate()?;
    Ok(config)
}

pub fn load_benchmark_file(path: &Path) -> Result<BenchmarkConfig> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    load_benchmark(&text).map_err(|e| match e {
        Error::Config { path: field, message } => Error::Config {
            path: format!("{}: {field}", path.display()),
            message,
        },
        other => other,
    })
}

/// Serializes a configuration so that `load_benchmark` returns it unchanged.
/// Consecutive chiplets of one kind whose ids follow the expansion pattern
/// are folded back into a single typed entry.
pub fn emit_benchmark(config: &BenchmarkConfig) -> String {
    let mut types = Vec::new();
    let mut i = 0;
    while i < config.chiplets.len() {
        let c = &config.chiplets[i];
        let mut count = 1;
        if c.id == format!("{}0", c.kind) {
            while let Some(next) = config.chiplets.get(i + count) {
                let same = next.kind == c.kind
                    && next.width == c.width
                    && next.height == c.height
                    && next.tdp == c.tdp
                    && next.rotatable == c.rotatable
                    && next.id == format!("{}{count}", c.kind);
                if !same {
                    break;
                }
                count += 1;
            }
        }
        // A folded entry needs count > 1 to reproduce indexed ids; a single
        // chiplet is written under its own id.
        let name = if count > 1 { c.kind.clone() } else { c.id.clone() };
        types.push(ChipletTypeDoc {
            name,
            width: c.width,
            height: c.height,
            tdp: c.tdp,
            count,
            rotatable: c.rotatable,
        });
        i += count;
    }
    let doc = BenchmarkDoc {
        format_version: BENCHMARK_FORMAT_VERSION,
        name: config.name.clone(),
        canvas_width: Some(config.canvas_width),
        canvas_height: Some(config.canvas_height),
        grid_n: config.grid_n,
        tdp_threshold: config.tdp_threshold,
        spacing: config.spacing,
        thermal: config.thermal,
        chiplet_types: types,
        nets: config
            .nets
            .iter()
            .map(|n| NetDoc {
                id: Some(n.id.clone()),
                endpoints: n.endpoints.clone(),
                weight: n.weight,
                pin_offsets: None,
            })
            .collect(),
    };
    toml::to_string(&doc).expect("benchmark document serializes")
}

/// Shipped benchmark presets.
pub mod presets {
    use super::*;

    pub const MULTI_GPU: &str = include_str!("../../../presets/multi-gpu.toml");
    pub const CPU_DRAM: &str = include_str!("../../../presets/cpu-dram.toml");

    pub fn names() -> [&'static str; 2] {
        ["multi-gpu", "cpu-dram"]
    }

    pub fn source(name: &str) -> Option<&'static str> {
        match name {
            "multi-gpu" => Some(MULTI_GPU),
            "cpu-dram" => Some(CPU_DRAM),
            _ => None,
        }
    }

    pub fn load(name: &str) -> Option<BenchmarkConfig> {
        source(name).map(|s| load_benchmark(s).expect("shipped preset is valid"))
    }

    pub fn multi_gpu() -> BenchmarkConfig {
        load("multi-gpu").unwrap()
    }

    pub fn cpu_dram() -> BenchmarkConfig {
        load("cpu-dram").unwrap()
    }
}

/// Per-kind summary, used by reports.
pub fn kinds(config: &BenchmarkConfig) -> BTreeMap<String, usize> {
    let mut out = BTreeMap::new();
    for c in &config.chiplets {
        *out.entry(c.kind.clone()).or_insert(0) += 1;
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn toy(tdps: &[(&str, f64, f64)]) -> BenchmarkConfig {
        BenchmarkConfig {
            name: "toy".into(),
            canvas_width: 16.0,
            canvas_height: 16.0,
            grid_n: 16,
            chiplets: tdps
                .iter()
                .map(|&(id, tdp, side)| Chiplet {
                    id: id.into(),
                    kind: id.into(),
                    width: side,
                    height: side,
                    tdp,
                    rotatable: true,
                })
                .collect(),
            nets: vec![],
            tdp_threshold: 80.0,
            thermal: ThermalParams {
                ambient_temp: 45.0,
                lateral_conductance: 1.0,
                vertical_conductance: 0.1,
            },
            spacing: 0,
        }
    }

    #[test]
    fn multi_gpu_preset_carries_table_values() {
        let cfg = presets::multi_gpu();
        let find = |kind: &str| cfg.chiplets.iter().find(|c| c.kind == kind).unwrap();
        let cpu = find("CPU");
        assert_eq!((cpu.width, cpu.height, cpu.tdp), (12.0, 12.0, 105.0));
        let gpu = find("GPU");
        assert_eq!((gpu.width, gpu.height, gpu.tdp), (18.2, 18.2, 295.0));
        let hbm = find("HBM");
        assert_eq!((hbm.width, hbm.height, hbm.tdp), (7.75, 11.87, 20.0));
        assert_eq!(cfg.tdp_threshold, 80.0);
        let k = kinds(&cfg);
        assert_eq!((k["CPU"], k["GPU"], k["HBM"]), (1, 4, 8));
    }

    #[test]
    fn cpu_dram_preset_carries_table_values() {
        let cfg = presets::cpu_dram();
        let cpu = cfg.chiplets.iter().find(|c| c.kind == "CPU").unwrap();
        assert_eq!((cpu.width, cpu.height, cpu.tdp), (8.25, 9.0, 150.0));
        let dram = cfg.chiplets.iter().find(|c| c.kind == "DRAM").unwrap();
        assert_eq!((dram.width, dram.height, dram.tdp), (8.75, 8.75, 20.0));
        let k = kinds(&cfg);
        assert_eq!((k["CPU"], k["DRAM"]), (4, 4));
    }

    #[test]
    fn unknown_endpoint_is_reported_with_path() {
        let src = r#"
format_version = 1
name = "bad"
tdp_threshold = 80.0
[thermal]
ambient_temp = 45.0
lateral_conductance = 1.0
vertical_conductance = 0.1
[[chiplet_types]]
name = "A"
width = 2.0
height = 2.0
tdp = 1.0
[[chiplet_types]]
name = "B"
width = 2.0
height = 2.0
tdp = 1.0
[[nets]]
endpoints = ["A", "X"]
"#;
        let err = load_benchmark(src).unwrap_err().to_string();
        assert!(err.contains("unknown endpoint"), "{err}");
        assert!(err.contains("nets[0].endpoints[1]"), "{err}");
    }

    #[test]
    fn footprint_larger_than_grid_rejected() {
        let mut cfg = toy(&[("A", 1.0, 4.0)]);
        cfg.chiplets[0].width = 17.0;
        assert!(matches!(cfg.validate(), Err(Error::ChipletTooLarge { .. })));
    }

    #[test]
    fn schema_violation_rejected() {
        let err = load_benchmark("format_version = 1\nname = 3\n").unwrap_err();
        assert!(matches!(err, Error::Config { .. }));
    }

    #[test]
    fn order_by_tdp() {
        let cfg = toy(&[("CPU", 105.0, 2.0), ("GPU", 295.0, 2.0), ("HBM", 20.0, 2.0)]);
        assert_eq!(placement_order_ids(&cfg), ["GPU", "CPU", "HBM"]);
    }

    #[test]
    fn order_ties_fall_back_to_id() {
        let cfg = toy(&[("c", 10.0, 2.0), ("a", 10.0, 2.0), ("b", 10.0, 2.0)]);
        assert_eq!(placement_order_ids(&cfg), ["a", "b", "c"]);
    }

    #[test]
    fn order_ties_prefer_larger_area() {
        let cfg = toy(&[("a", 10.0, 2.0), ("b", 10.0, 3.0)]);
        assert_eq!(placement_order_ids(&cfg), ["b", "a"]);
    }

    #[test]
    fn order_singleton() {
        let cfg = toy(&[("only", 3.0, 2.0)]);
        assert_eq!(placement_order_ids(&cfg), ["only"]);
    }

    #[test]
    fn presets_round_trip() {
        for name in presets::names() {
            let cfg = presets::load(name).unwrap();
            assert_eq!(load_benchmark(&emit_benchmark(&cfg)).unwrap(), cfg);
        }
    }

    #[test]
    fn regrid_rescales_vertical_conductance() {
        let cfg = presets::cpu_dram();
        let half = cfg.with_grid_n(cfg.grid_n / 2).unwrap();
        assert!((half.thermal.vertical_conductance - 4.0 * cfg.thermal.vertical_conductance).abs() < 1e-12);
        assert_eq!(half.thermal.lateral_conductance, cfg.thermal.lateral_conductance);
    }
}
