//! Canvas discretization, occupancy and the shared legality masks.
//!
//! Footprints are addressed by their top-left cell. Row 0 is the top edge
//! of the canvas and column 0 the left edge.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{BenchmarkConfig, Chiplet, Orientation};

pub const LAYOUT_FORMAT_VERSION: u32 = 1;

/// Slack when quantizing mm to cells, so that exact multiples of the cell
/// size are not rounded up by floating-point noise.
const QUANTIZE_EPS: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct CellIndex {
    pub row: usize,
    pub col: usize,
}

impl CellIndex {
    pub fn new(row: usize, col: usize) -> Self {
        CellIndex { row, col }
    }

    pub fn from_flat(index: usize, grid_n: usize) -> Self {
        CellIndex {
            row: index / grid_n,
            col: index % grid_n,
        }
    }

    pub fn flat(self, grid_n: usize) -> usize {
        self.row * grid_n + self.col
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Footprint {
    pub origin: CellIndex,
    pub span_rows: usize,
    pub span_cols: usize,
}

impl Footprint {
    pub fn row_end(&self) -> usize {
        self.origin.row + self.span_rows
    }

    pub fn col_end(&self) -> usize {
        self.origin.col + self.span_cols
    }

    pub fn cell_count(&self) -> usize {
        self.span_rows * self.span_cols
    }

    /// True when the two footprints are closer than `spacing` cells along
    /// both axes (spacing 0 means plain overlap).
    pub fn conflicts(&self, other: &Footprint, spacing: usize) -> bool {
        let sep_cols = self.col_end() + spacing <= other.origin.col || other.col_end() + spacing <= self.origin.col;
        let sep_rows = self.row_end() + spacing <= other.origin.row || other.row_end() + spacing <= self.origin.row;
        !(sep_cols || sep_rows)
    }

    pub fn cells(&self) -> impl Iterator<Item = CellIndex> + '_ {
        (self.origin.row..self.row_end())
            .flat_map(move |r| (self.origin.col..self.col_end()).map(move |c| CellIndex::new(r, c)))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Placed {
    pub chiplet: usize,
    pub footprint: Footprint,
    pub orientation: Orientation,
}

/// Occupancy plus the ordered list of placed chiplets. Treated as a value:
/// [`PlacementState::apply_placement`] returns a new state.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PlacementState {
    grid_n: usize,
    occupancy: Vec<bool>,
    placed: Vec<Placed>,
}

impl PlacementState {
    pub fn new(grid_n: usize) -> Self {
        PlacementState {
            grid_n,
            occupancy: vec![false; grid_n * grid_n],
            placed: Vec::new(),
        }
    }

    pub fn grid_n(&self) -> usize {
        self.grid_n
    }

    /// Index of the next chiplet in placement order.
    pub fn cursor(&self) -> usize {
        self.placed.len()
    }

    pub fn placed(&self) -> &[Placed] {
        &self.placed
    }

    pub fn occupancy(&self) -> &[bool] {
        &self.occupancy
    }

    pub fn is_occupied(&self, cell: CellIndex) -> bool {
        self.occupancy[cell.flat(self.grid_n)]
    }

    pub fn occupied_count(&self) -> usize {
        self.occupancy.iter().filter(|&&o| o).count()
    }

    pub fn find(&self, chiplet: usize) -> Option<&Placed> {
        self.placed.iter().find(|p| p.chiplet == chiplet)
    }

    /// Places `chiplet` with its top-left cell at `origin`.
    pub fn apply_placement(
        &self,
        config: &BenchmarkConfig,
        chiplet: usize,
        origin: CellIndex,
        orientation: Orientation,
    ) -> Result<PlacementState> {
        let c = &config.chiplets[chiplet];
        if self.find(chiplet).is_some() {
            return Err(Error::MaskedActionViolation(format!("{} is already placed", c.id)));
        }
        if orientation == Orientation::R90 && !c.rotatable {
            return Err(Error::MaskedActionViolation(format!("{} is not rotatable", c.id)));
        }
        let (span_rows, span_cols) = cells_of(c, orientation, config)?;
        let footprint = Footprint {
            origin,
            span_rows,
            span_cols,
        };
        if footprint.row_end() > self.grid_n || footprint.col_end() > self.grid_n {
            return Err(Error::MaskedActionViolation(format!(
                "{} at ({}, {}) {orientation} leaves the canvas",
                c.id, origin.row, origin.col
            )));
        }
        if let Some(hit) = self.placed.iter().find(|p| p.footprint.conflicts(&footprint, config.spacing)) {
            return Err(Error::MaskedActionViolation(format!(
                "{} at ({}, {}) {orientation} collides with {}",
                c.id, origin.row, origin.col, config.chiplets[hit.chiplet].id
            )));
        }

        let mut next = self.clone();
        for cell in footprint.cells() {
            next.occupancy[cell.flat(self.grid_n)] = true;
        }
        next.placed.push(Placed {
            chiplet,
            footprint,
            orientation,
        });
        Ok(next)
    }

    /// The same state with `chiplet` lifted off the canvas.
    pub fn without(&self, chiplet: usize) -> PlacementState {
        let mut next = self.clone();
        if let Some(pos) = next.placed.iter().position(|p| p.chiplet == chiplet) {
            let p = next.placed.remove(pos);
            for cell in p.footprint.cells() {
                next.occupancy[cell.flat(self.grid_n)] = false;
            }
        }
        next
    }

    /// Occupancy rebuilt from the placed list alone.
    pub fn recomputed_occupancy(&self) -> Vec<bool> {
        let mut occ = vec![false; self.grid_n * self.grid_n];
        for p in &self.placed {
            for cell in p.footprint.cells() {
                occ[cell.flat(self.grid_n)] = true;
            }
        }
        occ
    }

    /// Pairs of placed chiplets whose footprints intersect.
    pub fn overlapping_pairs(&self) -> Vec<(usize, usize)> {
        let mut out = Vec::new();
        for (i, a) in self.placed.iter().enumerate() {
            for b in &self.placed[i + 1..] {
                if a.footprint.conflicts(&b.footprint, 0) {
                    out.push((a.chiplet, b.chiplet));
                }
            }
        }
        out
    }
}

/// Per-cell real values over the grid, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct MaskGrid {
    pub grid_n: usize,
    pub values: Vec<f32>,
}

impl MaskGrid {
    pub fn filled(grid_n: usize, value: f32) -> Self {
        MaskGrid {
            grid_n,
            values: vec![value; grid_n * grid_n],
        }
    }

    pub fn get(&self, cell: CellIndex) -> f32 {
        self.values[cell.flat(self.grid_n)]
    }

    pub fn count_positive(&self) -> usize {
        self.values.iter().filter(|&&v| v > 0.0).count()
    }

    pub fn from_bools(grid_n: usize, bits: &[bool]) -> Self {
        MaskGrid {
            grid_n,
            values: bits.iter().map(|&b| if b { 1.0 } else { -1.0 }).collect(),
        }
    }
}

/// Footprint size in cells, `ceil(mm / cell_mm)` per axis.
pub fn cells_of(chiplet: &Chiplet, orientation: Orientation, config: &BenchmarkConfig) -> Result<(usize, usize)> {
    let (w, h) = chiplet.oriented_dims(orientation);
    let span_cols = ((w / config.cell_width()) - QUANTIZE_EPS).ceil().max(1.0) as usize;
    let span_rows = ((h / config.cell_height()) - QUANTIZE_EPS).ceil().max(1.0) as usize;
    if span_rows > config.grid_n || span_cols > config.grid_n {
        return Err(Error::ChipletTooLarge {
            chiplet: chiplet.id.clone(),
            span_rows,
            span_cols,
            grid_n: config.grid_n,
        });
    }
    Ok((span_rows, span_cols))
}

/// Legal top-left origins for a `span_rows x span_cols` footprint.
///
/// Uses a summed-area table over occupancy; a candidate is legal when no
/// occupied cell lies in the footprint grown by `spacing` on every side.
pub fn feasible_origins(state: &PlacementState, span_rows: usize, span_cols: usize, spacing: usize) -> Vec<bool> {
    let n = state.grid_n;
    let stride = n + 1;
    let mut sat = vec![0u32; stride * stride];
    for r in 0..n {
        let mut row_sum = 0u32;
        for c in 0..n {
            row_sum += state.occupancy[r * n + c] as u32;
            sat[(r + 1) * stride + c + 1] = sat[r * stride + c + 1] + row_sum;
        }
    }
    let rect = |r0: usize, c0: usize, r1: usize, c1: usize| -> u32 {
        sat[r1 * stride + c1] + sat[r0 * stride + c0] - sat[r0 * stride + c1] - sat[r1 * stride + c0]
    };

    let mut out = vec![false; n * n];
    if span_rows > n || span_cols > n {
        return out;
    }
    for r in 0..=n - span_rows {
        let r0 = r.saturating_sub(spacing);
        let r1 = (r + span_rows + spacing).min(n);
        for c in 0..=n - span_cols {
            let c0 = c.saturating_sub(spacing);
            let c1 = (c + span_cols + spacing).min(n);
            out[r * n + c] = rect(r0, c0, r1, c1) == 0;
        }
    }
    out
}

/// Feasible origins for `chiplet` in `orientation`; empty when the
/// orientation is not allowed.
pub fn feasible_for(
    state: &PlacementState,
    chiplet: &Chiplet,
    orientation: Orientation,
    config: &BenchmarkConfig,
) -> Vec<bool> {
    let n = config.grid_n;
    if orientation == Orientation::R90 && !chiplet.rotatable {
        return vec![false; n * n];
    }
    match cells_of(chiplet, orientation, config) {
        Ok((rows, cols)) => feasible_origins(state, rows, cols, config.spacing),
        Err(_) => vec![false; n * n],
    }
}

/// +1 where `chiplet` can be placed with that origin, −1 elsewhere.
pub fn position_mask(
    state: &PlacementState,
    chiplet: &Chiplet,
    orientation: Orientation,
    config: &BenchmarkConfig,
) -> MaskGrid {
    MaskGrid::from_bools(config.grid_n, &feasible_for(state, chiplet, orientation, config))
}

pub fn rotation_position_mask(state: &PlacementState, chiplet: &Chiplet, config: &BenchmarkConfig) -> MaskGrid {
    position_mask(state, chiplet, Orientation::R90, config)
}

/// +1 on occupied cells, −1 on free ones.
pub fn view_mask(state: &PlacementState) -> MaskGrid {
    MaskGrid::from_bools(state.grid_n, &state.occupancy)
}

/// Sufficient condition for deadlock-free placement: checks, for every
/// chiplet in `order`, that some allowed orientation has more candidate
/// origins than the earlier chiplets can block in the worst case.
///
/// A placed `h_i x w_i` footprint rules out at most
/// `(h_i + h_j + 2s − 1)(w_i + w_j + 2s − 1)` origins of an `h_j x w_j`
/// footprint with spacing `s`, whatever its position and orientation.
pub fn never_deadlocks(config: &BenchmarkConfig, order: &[usize]) -> bool {
    let n = config.grid_n;
    let s = config.spacing;
    let spans = |c: &Chiplet| -> Vec<(usize, usize)> {
        let os: &[Orientation] = if c.rotatable { &Orientation::ALL } else { &[Orientation::R0] };
        os.iter().filter_map(|&o| cells_of(c, o, config).ok()).collect()
    };
    let all: Vec<Vec<(usize, usize)>> = order.iter().map(|&i| spans(&config.chiplets[i])).collect();
    (0..order.len()).all(|k| {
        all[k].iter().any(|&(hj, wj)| {
            let origins = (n + 1 - hj) * (n + 1 - wj);
            let blocked: usize = all[..k]
                .iter()
                .map(|prev| {
                    prev.iter()
                        .map(|&(hi, wi)| (hi + hj + 2 * s - 1) * (wi + wj + 2 * s - 1))
                        .max()
                        .unwrap_or(0)
                })
                .sum();
            origins > blocked
        })
    })
}

// ---------------------------------------------------------------------------
// Layout serialization

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LayoutEntry {
    pub chiplet: String,
    pub row: usize,
    pub col: usize,
    pub orientation: Orientation,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Layout {
    pub format_version: u32,
    pub benchmark: String,
    pub grid_n: usize,
    pub placements: Vec<LayoutEntry>,
}

impl Layout {
    pub fn from_state(state: &PlacementState, config: &BenchmarkConfig) -> Self {
        Layout {
            format_version: LAYOUT_FORMAT_VERSION,
            benchmark: config.name.clone(),
            grid_n: config.grid_n,
            placements: state
                .placed()
                .iter()
                .map(|p| LayoutEntry {
                    chiplet: config.chiplets[p.chiplet].id.clone(),
                    row: p.footprint.origin.row,
                    col: p.footprint.origin.col,
                    orientation: p.orientation,
                })
                .collect(),
        }
    }

    /// Rebuilds the placement state, rejecting any illegal entry.
    pub fn to_state(&self, config: &BenchmarkConfig) -> Result<PlacementState> {
        if self.format_version != LAYOUT_FORMAT_VERSION {
            return Err(Error::config(
                "format_version",
                format!("unsupported layout version {}", self.format_version),
            ));
        }
        if self.grid_n != config.grid_n {
            return Err(Error::config(
                "grid_n",
                format!("layout uses grid_n {} but the benchmark has {}", self.grid_n, config.grid_n),
            ));
        }
        let mut state = PlacementState::new(config.grid_n);
        for (i, e) in self.placements.iter().enumerate() {
            let idx = config
                .chiplet_index(&e.chiplet)
                .ok_or_else(|| Error::config(format!("placements[{i}].chiplet"), format!("unknown chiplet {:?}", e.chiplet)))?;
            state = state.apply_placement(config, idx, CellIndex::new(e.row, e.col), e.orientation)?;
        }
        Ok(state)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("layout serializes")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::config("<layout>", e.to_string()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::ThermalParams;

    fn square_config(grid_n: usize, cell_mm: f64, chiplets: &[(f64, f64, bool)]) -> BenchmarkConfig {
        BenchmarkConfig {
            name: "t".into(),
            canvas_width: grid_n as f64 * cell_mm,
            canvas_height: grid_n as f64 * cell_mm,
            grid_n,
            chiplets: chiplets
                .iter()
                .enumerate()
                .map(|(i, &(w, h, rot))| Chiplet {
                    id: format!("c{i}"),
                    kind: format!("c{i}"),
                    width: w,
                    height: h,
                    tdp: 1.0,
                    rotatable: rot,
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
    fn ceil_quantization() {
        let cfg = square_config(16, 1.5, &[(12.0, 12.0, true)]);
        assert_eq!(cells_of(&cfg.chiplets[0], Orientation::R0, &cfg).unwrap(), (8, 8));
        let cfg = square_config(16, 1.5, &[(12.1, 3.0, true)]);
        assert_eq!(cells_of(&cfg.chiplets[0], Orientation::R0, &cfg).unwrap(), (2, 9));
        assert_eq!(cells_of(&cfg.chiplets[0], Orientation::R90, &cfg).unwrap(), (9, 2));
    }

    #[test]
    fn square_chiplet_spans_match_under_rotation() {
        let cfg = square_config(16, 1.0, &[(5.0, 5.0, true)]);
        let c = &cfg.chiplets[0];
        assert_eq!(cells_of(c, Orientation::R0, &cfg).unwrap(), cells_of(c, Orientation::R90, &cfg).unwrap());
    }

    #[test]
    fn chiplet_wider_than_canvas() {
        let cfg = square_config(4, 1.0, &[(4.5, 1.0, true)]);
        assert!(matches!(
            cells_of(&cfg.chiplets[0], Orientation::R0, &cfg),
            Err(Error::ChipletTooLarge { .. })
        ));
    }

    #[test]
    fn position_mask_after_one_placement() {
        let cfg = square_config(4, 1.0, &[(2.0, 2.0, true), (2.0, 2.0, true)]);
        let s = PlacementState::new(4)
            .apply_placement(&cfg, 0, CellIndex::new(0, 0), Orientation::R0)
            .unwrap();
        let m = position_mask(&s, &cfg.chiplets[1], Orientation::R0, &cfg);
        let feasible: Vec<(usize, usize)> = (0..16)
            .filter(|&i| m.values[i] > 0.0)
            .map(|i| (i / 4, i % 4))
            .collect();
        assert_eq!(feasible, [(0, 2), (1, 2), (2, 0), (2, 1), (2, 2)]);
    }

    #[test]
    fn empty_canvas_unit_chiplet_everywhere_feasible() {
        let cfg = square_config(5, 1.0, &[(1.0, 1.0, true)]);
        let m = position_mask(&PlacementState::new(5), &cfg.chiplets[0], Orientation::R0, &cfg);
        assert_eq!(m.count_positive(), 25);
    }

    #[test]
    fn full_canvas_nothing_feasible() {
        let cfg = square_config(4, 1.0, &[(4.0, 4.0, true), (1.0, 1.0, true)]);
        let s = PlacementState::new(4)
            .apply_placement(&cfg, 0, CellIndex::new(0, 0), Orientation::R0)
            .unwrap();
        let m = position_mask(&s, &cfg.chiplets[1], Orientation::R0, &cfg);
        assert!(m.values.iter().all(|&v| v == -1.0));
    }

    #[test]
    fn rotation_mask_of_rectangle() {
        // 2 wide, 1 tall.
        let cfg = square_config(2, 1.0, &[(2.0, 1.0, true)]);
        let s = PlacementState::new(2);
        let r0 = position_mask(&s, &cfg.chiplets[0], Orientation::R0, &cfg);
        let r90 = rotation_position_mask(&s, &cfg.chiplets[0], &cfg);
        assert_eq!(r0.values, [1.0, -1.0, 1.0, -1.0]);
        assert_eq!(r90.values, [1.0, 1.0, -1.0, -1.0]);
    }

    #[test]
    fn rotation_mask_square_and_non_rotatable() {
        let cfg = square_config(6, 1.0, &[(2.0, 2.0, true), (3.0, 3.0, true), (2.0, 1.0, false)]);
        let s = PlacementState::new(6)
            .apply_placement(&cfg, 0, CellIndex::new(1, 1), Orientation::R0)
            .unwrap();
        assert_eq!(
            rotation_position_mask(&s, &cfg.chiplets[1], &cfg),
            position_mask(&s, &cfg.chiplets[1], Orientation::R0, &cfg)
        );
        assert!(rotation_position_mask(&s, &cfg.chiplets[2], &cfg)
            .values
            .iter()
            .all(|&v| v == -1.0));
    }

    #[test]
    fn view_mask_tracks_occupancy() {
        let cfg = square_config(4, 1.0, &[(2.0, 2.0, true)]);
        let s0 = PlacementState::new(4);
        assert!(view_mask(&s0).values.iter().all(|&v| v == -1.0));
        let s1 = s0.apply_placement(&cfg, 0, CellIndex::new(0, 0), Orientation::R0).unwrap();
        assert_eq!(view_mask(&s1).count_positive(), 4);
        // old state untouched
        assert_eq!(s0.occupied_count(), 0);
    }

    #[test]
    fn overlapping_origin_rejected() {
        let cfg = square_config(4, 1.0, &[(2.0, 2.0, true), (2.0, 2.0, true)]);
        let s = PlacementState::new(4)
            .apply_placement(&cfg, 0, CellIndex::new(0, 0), Orientation::R0)
            .unwrap();
        let err = s.apply_placement(&cfg, 1, CellIndex::new(1, 1), Orientation::R0).unwrap_err();
        assert!(matches!(err, Error::MaskedActionViolation(_)));
        let err = s.apply_placement(&cfg, 1, CellIndex::new(3, 3), Orientation::R0).unwrap_err();
        assert!(matches!(err, Error::MaskedActionViolation(_)));
    }

    #[test]
    fn legal_placement_marks_span_cells() {
        let cfg = square_config(8, 1.0, &[(3.0, 2.0, true)]);
        let s = PlacementState::new(8)
            .apply_placement(&cfg, 0, CellIndex::new(4, 1), Orientation::R90)
            .unwrap();
        assert_eq!(s.occupied_count(), 6);
        assert_eq!(s.placed()[0].footprint.span_rows, 3);
        assert_eq!(s.placed()[0].footprint.span_cols, 2);
    }

    #[test]
    fn spacing_keeps_clearance() {
        let mut cfg = square_config(6, 1.0, &[(2.0, 2.0, true), (1.0, 1.0, true)]);
        cfg.spacing = 1;
        let s = PlacementState::new(6)
            .apply_placement(&cfg, 0, CellIndex::new(0, 0), Orientation::R0)
            .unwrap();
        let m = position_mask(&s, &cfg.chiplets[1], Orientation::R0, &cfg);
        assert_eq!(m.get(CellIndex::new(0, 2)), -1.0);
        assert_eq!(m.get(CellIndex::new(2, 2)), -1.0);
        assert_eq!(m.get(CellIndex::new(0, 3)), 1.0);
        assert!(s.apply_placement(&cfg, 1, CellIndex::new(2, 1), Orientation::R0).is_err());
    }

    #[test]
    fn walk_all_chiplets() {
        let cfg = square_config(6, 1.0, &[(3.0, 3.0, true), (2.0, 3.0, true), (3.0, 1.0, true)]);
        let mut s = PlacementState::new(6);
        for (i, (r, c, o)) in [(0, 0, Orientation::R0), (0, 3, Orientation::R0), (3, 0, Orientation::R90)]
            .into_iter()
            .enumerate()
        {
            s = s.apply_placement(&cfg, i, CellIndex::new(r, c), o).unwrap();
        }
        assert_eq!(s.cursor(), cfg.chiplets.len());
        assert!(s.overlapping_pairs().is_empty());
    }

    #[test]
    fn layout_json_round_trip() {
        let cfg = square_config(6, 1.0, &[(3.0, 3.0, true), (2.0, 3.0, true)]);
        let s = PlacementState::new(6)
            .apply_placement(&cfg, 1, CellIndex::new(2, 2), Orientation::R90)
            .unwrap();
        let layout = Layout::from_state(&s, &cfg);
        let back = Layout::from_json(&layout.to_json()).unwrap();
        assert_eq!(back.to_state(&cfg).unwrap(), s);
    }

    #[test]
    fn shipped_presets_cannot_deadlock() {
        use crate::model::{placement_order, presets};
        for name in presets::names() {
            let base = presets::load(name).unwrap();
            for n in [base.grid_n, 32] {
                let cfg = base.with_grid_n(n).unwrap();
                assert!(never_deadlocks(&cfg, &placement_order(&cfg)), "{name} at grid {n}");
            }
        }
    }

    #[test]
    fn deadlock_bound_is_sound() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(17);
        let mut certified = 0;
        for _ in 0..400 {
            let n = rng.gen_range(4..=9);
            let k = rng.gen_range(2..=5);
            let dims: Vec<(f64, f64, bool)> = (0..k)
                .map(|_| (rng.gen_range(1..=3) as f64, rng.gen_range(1..=3) as f64, rng.gen_bool(0.5)))
                .collect();
            let cfg = square_config(n, 1.0, &dims);
            let order: Vec<usize> = (0..k).collect();
            if !never_deadlocks(&cfg, &order) {
                continue;
            }
            certified += 1;
            for _ in 0..20 {
                let mut s = PlacementState::new(n);
                for &c in &order {
                    let ch = &cfg.chiplets[c];
                    let opts: Vec<(usize, Orientation)> = Orientation::ALL
                        .iter()
                        .flat_map(|&o| {
                            feasible_for(&s, ch, o, &cfg)
                                .into_iter()
                                .enumerate()
                                .filter(|x| x.1)
                                .map(move |(i, _)| (i, o))
                        })
                        .collect();
                    assert!(!opts.is_empty(), "certified instance deadlocked");
                    let (i, o) = opts[rng.gen_range(0..opts.len())];
                    s = s.apply_placement(&cfg, c, CellIndex::from_flat(i, n), o).unwrap();
                }
            }
        }
        assert!(certified > 50);
    }
}
