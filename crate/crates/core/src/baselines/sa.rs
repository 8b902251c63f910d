//! Simulated annealing over complete legal layouts.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::random::random_layout;
use super::Evaluated;
use crate::error::{Error, Result};
use crate::grid::{cells_of, feasible_for, CellIndex, PlacementState};
use crate::model::{placement_order, BenchmarkConfig, Netlist, Orientation};
use crate::thermal::hotspot;
use crate::wirelength::total_hpwl;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SaConfig {
    /// Starting temperature; probed from the initial layout when unset.
    pub initial_temp: Option<f64>,
    pub cooling: f64,
    pub moves_per_temp: usize,
    /// Stop temperature; `initial_temp * 1e-3` when unset.
    pub min_temp: Option<f64>,
    /// Hard cap on proposed moves.
    pub max_moves: Option<usize>,
    pub w_wl: f64,
    pub w_temp: f64,
    /// mm; canvas half-perimeter × net count when unset.
    pub wl_norm: Option<f64>,
    /// °C of rise above ambient.
    pub temp_norm: f64,
    pub probe_moves: usize,
    pub target_acceptance: f64,
    pub seed: u64,
}

impl Default for SaConfig {
    fn default() -> Self {
        SaConfig {
            initial_temp: None,
            cooling: 0.95,
            moves_per_temp: 200,
            min_temp: None,
            max_moves: None,
            w_wl: 0.5,
            w_temp: 0.5,
            wl_norm: None,
            temp_norm: 50.0,
            probe_moves: 100,
            target_acceptance: 0.8,
            seed: 0,
        }
    }
}

impl SaConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |f: &str, m: &str| Err(Error::config(format!("sa.{f}"), m.to_string()));
        if !(self.w_wl >= 0.0 && self.w_temp >= 0.0) || self.w_wl + self.w_temp == 0.0 {
            return bad("w_wl", "weights must be non-negative and not both zero");
        }
        if !(self.cooling > 0.0 && self.cooling < 1.0) {
            return bad("cooling", "must lie in (0, 1)");
        }
        if self.moves_per_temp == 0 {
            return bad("moves_per_temp", "must be positive");
        }
        if !(self.temp_norm > 0.0) || self.wl_norm.is_some_and(|w| !(w > 0.0)) {
            return bad("temp_norm", "normalization constants must be positive");
        }
        if !(self.target_acceptance > 0.0 && self.target_acceptance < 1.0) {
            return bad("target_acceptance", "must lie in (0, 1)");
        }
        if self.initial_temp.is_some_and(|t| !(t > 0.0)) || self.min_temp.is_some_and(|t| !(t > 0.0)) {
            return bad("initial_temp", "temperatures must be positive");
        }
        Ok(())
    }

    pub fn wl_norm_for(&self, config: &BenchmarkConfig) -> f64 {
        self.wl_norm
            .unwrap_or((config.canvas_width + config.canvas_height) * config.nets.len().max(1) as f64)
    }
}

/// Metropolis rule: downhill and flat moves always pass; uphill moves pass
/// with probability `exp(−delta / temp)`.
pub fn metropolis_accept(delta: f64, temp: f64, rng: &mut impl Rng) -> bool {
    if delta <= 0.0 {
        return true;
    }
    rng.gen::<f64>() < (-delta / temp).exp()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MoveKind {
    Translate,
    Swap,
    Rotate,
}

/// New position for one chiplet.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Relocation {
    pub chiplet: usize,
    pub row: usize,
    pub col: usize,
    pub orientation: Orientation,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Move {
    pub kind: MoveKind,
    pub relocations: Vec<Relocation>,
}

impl Move {
    /// Lifts every moved chiplet, then re-places each at its new position.
    pub fn apply(&self, state: &PlacementState, config: &BenchmarkConfig) -> Result<PlacementState> {
        let mut next = state.clone();
        for r in &self.relocations {
            next = next.without(r.chiplet);
        }
        for r in &self.relocations {
            next = next.apply_placement(config, r.chiplet, CellIndex::new(r.row, r.col), r.orientation)?;
        }
        Ok(next)
    }
}

/// One proposed move and its outcome.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceStep {
    pub iteration: usize,
    pub temperature: f64,
    #[serde(rename = "move")]
    pub mv: Move,
    pub candidate_cost: f64,
    pub accepted: bool,
    /// Cost of the current layout after the decision.
    pub cost: f64,
    pub best_cost: f64,
}

#[derive(Debug, Clone)]
pub struct SaResult {
    pub initial: PlacementState,
    pub initial_cost: f64,
    pub best: Evaluated,
    pub best_cost: f64,
    pub initial_temp: f64,
    pub trace: Vec<TraceStep>,
}

/// Weighted normalized cost of a complete layout.
pub struct CostModel<'a> {
    config: &'a BenchmarkConfig,
    netlist: Netlist,
    w_wl: f64,
    w_temp: f64,
    wl_norm: f64,
    temp_norm: f64,
}

impl<'a> CostModel<'a> {
    pub fn new(config: &'a BenchmarkConfig, sa: &SaConfig) -> Self {
        CostModel {
            config,
            netlist: Netlist::new(config),
            w_wl: sa.w_wl,
            w_temp: sa.w_temp,
            wl_norm: sa.wl_norm_for(config),
            temp_norm: sa.temp_norm,
        }
    }

    /// `w_wl·WL/WL_norm + w_temp·T_rise/T_norm`; skips the thermal solve
    /// when `w_temp` is zero.
    pub fn cost(&self, state: &PlacementState) -> Result<f64> {
        let wl = total_hpwl(state, self.config, &self.netlist);
        let mut c = self.w_wl * wl / self.wl_norm;
        if self.w_temp != 0.0 {
            let rise = hotspot(state, self.config)? - self.config.thermal.ambient_temp;
            c += self.w_temp * rise / self.temp_norm;
        }
        Ok(c)
    }
}

fn relocate_to(state: &PlacementState, chiplet: usize, row: usize, col: usize, o: Orientation) -> Relocation {
    debug_assert!(state.grid_n() > row && state.grid_n() > col);
    Relocation {
        chiplet,
        row,
        col,
        orientation: o,
    }
}

/// Draws a legal move. Translation is always possible (the current cell is
/// a candidate), so this terminates.
fn propose(state: &PlacementState, config: &BenchmarkConfig, rng: &mut impl Rng) -> Result<Move> {
    let n = config.grid_n;
    let k = state.placed().len();
    loop {
        let roll: f64 = rng.gen();
        if roll < 0.5 || k < 2 && roll < 0.8 {
            let p = state.placed()[rng.gen_range(0..k)];
            let lifted = state.without(p.chiplet);
            let f = feasible_for(&lifted, &config.chiplets[p.chiplet], p.orientation, config);
            let cells: Vec<usize> = (0..f.len()).filter(|&i| f[i]).collect();
            let cell = CellIndex::from_flat(cells[rng.gen_range(0..cells.len())], n);
            return Ok(Move {
                kind: MoveKind::Translate,
                relocations: vec![relocate_to(state, p.chiplet, cell.row, cell.col, p.orientation)],
            });
        } else if roll < 0.8 {
            let i = rng.gen_range(0..k);
            let j = (i + rng.gen_range(1..k)) % k;
            let (a, b) = (state.placed()[i], state.placed()[j]);
            // Swap centres, clamping each footprint back onto the canvas.
            let place = |who: &crate::grid::Placed, at: &crate::grid::Placed| -> (usize, usize) {
                let cr2 = 2 * at.footprint.origin.row + at.footprint.span_rows;
                let cc2 = 2 * at.footprint.origin.col + at.footprint.span_cols;
                let r = (cr2.saturating_sub(who.footprint.span_rows) / 2).min(n - who.footprint.span_rows);
                let c = (cc2.saturating_sub(who.footprint.span_cols) / 2).min(n - who.footprint.span_cols);
                (r, c)
            };
            let (ar, ac) = place(&a, &b);
            let (br, bc) = place(&b, &a);
            let mv = Move {
                kind: MoveKind::Swap,
                relocations: vec![
                    relocate_to(state, a.chiplet, ar, ac, a.orientation),
                    relocate_to(state, b.chiplet, br, bc, b.orientation),
                ],
            };
            if mv.apply(state, config).is_ok() {
                return Ok(mv);
            }
        } else {
            let p = state.placed()[rng.gen_range(0..k)];
            let c = &config.chiplets[p.chiplet];
            if !c.rotatable {
                continue;
            }
            let o = p.orientation.toggled();
            let (rows, cols) = cells_of(c, o, config)?;
            // Rotate about the centre, clamped onto the canvas.
            let cr2 = 2 * p.footprint.origin.row + p.footprint.span_rows;
            let cc2 = 2 * p.footprint.origin.col + p.footprint.span_cols;
            let r = (cr2.saturating_sub(rows) / 2).min(n - rows);
            let cc = (cc2.saturating_sub(cols) / 2).min(n - cols);
            let mv = Move {
                kind: MoveKind::Rotate,
                relocations: vec![relocate_to(state, p.chiplet, r, cc, o)],
            };
            if mv.apply(state, config).is_ok() {
                return Ok(mv);
            }
        }
    }
}

/// Anneals from a random legal layout and returns the best layout seen.
pub fn sa_search(config: &BenchmarkConfig, sa: &SaConfig) -> Result<SaResult> {
    sa.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(sa.seed);
    let order = placement_order(config);
    let model = CostModel::new(config, sa);
    let initial = random_layout(config, &order, &mut rng)?;
    let initial_cost = model.cost(&initial)?;

    let t0 = match sa.initial_temp {
        Some(t) => t,
        None => {
            let mut uphill = Vec::new();
            for _ in 0..sa.probe_moves {
                let mv = propose(&initial, config, &mut rng)?;
                let d = model.cost(&mv.apply(&initial, config)?)? - initial_cost;
                if d > 0.0 {
                    uphill.push(d);
                }
            }
            if uphill.is_empty() {
                1e-6
            } else {
                let mean = uphill.iter().sum::<f64>() / uphill.len() as f64;
                -mean / sa.target_acceptance.ln()
            }
        }
    };
    let t_min = sa.min_temp.unwrap_or(t0 * 1e-3);

    let mut current = initial.clone();
    let mut cost = initial_cost;
    let mut best = initial.clone();
    let mut best_cost = initial_cost;
    let mut trace = Vec::new();
    let mut temp = t0;
    let mut iteration = 0usize;
    let cap = sa.max_moves.unwrap_or(usize::MAX);
    'outer: while temp >= t_min {
        for _ in 0..sa.moves_per_temp {
            if iteration >= cap {
                break 'outer;
            }
            let mv = propose(&current, config, &mut rng)?;
            let cand = mv.apply(&current, config)?;
            let cand_cost = model.cost(&cand)?;
            let accepted = metropolis_accept(cand_cost - cost, temp, &mut rng);
            if accepted {
                current = cand;
                cost = cand_cost;
                if cost < best_cost {
                    best = current.clone();
                    best_cost = cost;
                }
            }
            trace.push(TraceStep {
                iteration,
                temperature: temp,
                mv,
                candidate_cost: cand_cost,
                accepted,
                cost,
                best_cost,
            });
            iteration += 1;
        }
        temp *= sa.cooling;
    }

    Ok(SaResult {
        best: Evaluated::of(best, config, &model.netlist)?,
        initial,
        initial_cost,
        best_cost,
        initial_temp: t0,
        trace,
    })
}

/// Re-applies the accepted moves of `trace` to `initial`, checking every
/// recorded cost against a fresh evaluation. Returns the final layout.
pub fn replay(config: &BenchmarkConfig, sa: &SaConfig, initial: &PlacementState, trace: &[TraceStep]) -> Result<PlacementState> {
    let model = CostModel::new(config, sa);
    let mut current = initial.clone();
    let check = |what: &str, i: usize, want: f64, got: f64| {
        if (want - got).abs() > 1e-9 * want.abs().max(1.0) {
            Err(Error::NonFinite(format!("replay diverged at move {i}: {what} {want} vs {got}")))
        } else {
            Ok(())
        }
    };
    for step in trace {
        let cand = step.mv.apply(&current, config)?;
        check("candidate cost", step.iteration, step.candidate_cost, model.cost(&cand)?)?;
        if step.accepted {
            current = cand;
        }
        check("cost", step.iteration, step.cost, model.cost(&current)?)?;
    }
    Ok(current)
}
