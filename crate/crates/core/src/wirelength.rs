//! Half-perimeter wirelength and the per-cell wire mask.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::grid::{feasible_for, CellIndex, MaskGrid, Placed, PlacementState};
use crate::model::{BenchmarkConfig, Netlist, Orientation};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WirelengthReport {
    /// mm
    pub total_hpwl: f64,
    /// mm per net id
    pub per_net: BTreeMap<String, f64>,
}

/// Centre in mm (x right, y down) of a chiplet whose top-left cell is
/// `origin`.
pub fn center_mm(config: &BenchmarkConfig, chiplet: usize, origin: CellIndex, orientation: Orientation) -> (f64, f64) {
    let (w, h) = config.chiplets[chiplet].oriented_dims(orientation);
    (
        origin.col as f64 * config.cell_width() + 0.5 * w,
        origin.row as f64 * config.cell_height() + 0.5 * h,
    )
}

fn placed_center(config: &BenchmarkConfig, p: &Placed) -> (f64, f64) {
    center_mm(config, p.chiplet, p.footprint.origin, p.orientation)
}

/// Centre per chiplet index, `None` while unplaced.
pub fn placed_centers(state: &PlacementState, config: &BenchmarkConfig) -> Vec<Option<(f64, f64)>> {
    let mut out = vec![None; config.chiplets.len()];
    for p in state.placed() {
        out[p.chiplet] = Some(placed_center(config, p));
    }
    out
}

#[derive(Debug, Clone, Copy)]
struct BBox {
    count: usize,
    x_min: f64,
    x_max: f64,
    y_min: f64,
    y_max: f64,
}

impl BBox {
    fn empty() -> Self {
        BBox {
            count: 0,
            x_min: f64::INFINITY,
            x_max: f64::NEG_INFINITY,
            y_min: f64::INFINITY,
            y_max: f64::NEG_INFINITY,
        }
    }

    fn add(&mut self, (x, y): (f64, f64)) {
        self.count += 1;
        self.x_min = self.x_min.min(x);
        self.x_max = self.x_max.max(x);
        self.y_min = self.y_min.min(y);
        self.y_max = self.y_max.max(y);
    }

    fn half_perimeter(&self) -> f64 {
        if self.count < 2 {
            0.0
        } else {
            (self.x_max - self.x_min) + (self.y_max - self.y_min)
        }
    }
}

fn net_bbox(members: &[usize], centers: &[Option<(f64, f64)>], skip: Option<usize>) -> BBox {
    let mut bb = BBox::empty();
    for &m in members {
        if Some(m) == skip {
            continue;
        }
        if let Some(c) = centers[m] {
            bb.add(c);
        }
    }
    bb
}

/// Weighted HPWL over placed endpoints. Nets with fewer than two placed
/// endpoints contribute zero.
pub fn hpwl(state: &PlacementState, config: &BenchmarkConfig, netlist: &Netlist) -> WirelengthReport {
    let centers = placed_centers(state, config);
    let mut per_net = BTreeMap::new();
    let mut total = 0.0;
    for (n, members) in netlist.members.iter().enumerate() {
        let wl = netlist.weights[n] * net_bbox(members, &centers, None).half_perimeter();
        total += wl;
        per_net.insert(config.nets[n].id.clone(), wl);
    }
    WirelengthReport {
        total_hpwl: total,
        per_net,
    }
}

pub fn total_hpwl(state: &PlacementState, config: &BenchmarkConfig, netlist: &Netlist) -> f64 {
    let centers = placed_centers(state, config);
    netlist
        .members
        .iter()
        .zip(&netlist.weights)
        .map(|(m, w)| w * net_bbox(m, &centers, None).half_perimeter())
        .sum()
}

/// Raw HPWL change for placing `chiplet` with its origin at every cell.
///
/// Only nets touching `chiplet` change. Each net's delta is separable in x
/// and y, so it is tabulated per column and per row and summed per cell.
/// Origins whose footprint would leave the canvas still get a value.
pub fn wire_deltas(
    state: &PlacementState,
    config: &BenchmarkConfig,
    netlist: &Netlist,
    chiplet: usize,
    orientation: Orientation,
) -> Vec<f64> {
    let n = config.grid_n;
    let centers = placed_centers(state, config);
    let (w, h) = config.chiplets[chiplet].oriented_dims(orientation);
    let xs: Vec<f64> = (0..n).map(|c| c as f64 * config.cell_width() + 0.5 * w).collect();
    let ys: Vec<f64> = (0..n).map(|r| r as f64 * config.cell_height() + 0.5 * h).collect();

    let mut out = vec![0.0; n * n];
    let mut col_term = vec![0.0; n];
    let mut row_term = vec![0.0; n];
    for &net in &netlist.by_chiplet[chiplet] {
        let bb = net_bbox(&netlist.members[net], &centers, Some(chiplet));
        if bb.count == 0 {
            continue;
        }
        let weight = netlist.weights[net];
        let before = bb.half_perimeter();
        for (t, &x) in col_term.iter_mut().zip(&xs) {
            *t = weight * (bb.x_max.max(x) - bb.x_min.min(x));
        }
        for (t, &y) in row_term.iter_mut().zip(&ys) {
            *t = weight * (bb.y_max.max(y) - bb.y_min.min(y));
        }
        let base = weight * before;
        for r in 0..n {
            let row = &mut out[r * n..(r + 1) * n];
            for (c, v) in row.iter_mut().enumerate() {
                *v += col_term[c] + row_term[r] - base;
            }
        }
    }
    out
}

/// Min-max maps `raw` over `feasible` cells onto [−1, 1]; infeasible cells
/// get +1 (worst). A constant feasible set maps to 0.
pub fn normalize_over_feasible(raw: &[f64], feasible: &[bool]) -> Vec<f32> {
    let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
    for (&v, &ok) in raw.iter().zip(feasible) {
        if ok {
            lo = lo.min(v);
            hi = hi.max(v);
        }
    }
    let span = hi - lo;
    raw.iter()
        .zip(feasible)
        .map(|(&v, &ok)| {
            if !ok {
                1.0
            } else if span > 0.0 {
                (2.0 * (v - lo) / span - 1.0).clamp(-1.0, 1.0) as f32
            } else {
                0.0
            }
        })
        .collect()
}

/// Wire mask for one orientation, normalized over its own feasible cells.
pub fn wire_mask(
    state: &PlacementState,
    config: &BenchmarkConfig,
    netlist: &Netlist,
    chiplet: usize,
    orientation: Orientation,
) -> MaskGrid {
    let raw = wire_deltas(state, config, netlist, chiplet, orientation);
    let feasible = feasible_for(state, &config.chiplets[chiplet], orientation, config);
    MaskGrid {
        grid_n: config.grid_n,
        values: normalize_over_feasible(&raw, &feasible),
    }
}

/// R0 and R90 wire masks normalized jointly over the union of their
/// feasible cells, so the two channels are on one scale.
pub fn wire_mask_pair(
    state: &PlacementState,
    config: &BenchmarkConfig,
    netlist: &Netlist,
    chiplet: usize,
    feasible: [&[bool]; 2],
) -> [MaskGrid; 2] {
    let n2 = config.grid_n * config.grid_n;
    let mut raw = wire_deltas(state, config, netlist, chiplet, Orientation::R0);
    raw.extend(wire_deltas(state, config, netlist, chiplet, Orientation::R90));
    let mut both = feasible[0].to_vec();
    both.extend_from_slice(feasible[1]);
    let mut values = normalize_over_feasible(&raw, &both);
    let r90 = values.split_off(n2);
    [
        MaskGrid {
            grid_n: config.grid_n,
            values,
        },
        MaskGrid {
            grid_n: config.grid_n,
            values: r90,
        },
    ]
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::testutil::{random_instance, toy_config};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn oracle_hpwl(state: &PlacementState, config: &BenchmarkConfig) -> f64 {
        let mut total = 0.0;
        for net in &config.nets {
            let pts: Vec<(f64, f64)> = net
                .endpoints
                .iter()
                .filter_map(|id| {
                    let idx = config.chiplet_index(id).unwrap();
                    state.find(idx).map(|p| {
                        let (w, h) = config.chiplets[idx].oriented_dims(p.orientation);
                        (
                            p.footprint.origin.col as f64 * config.cell_width() + w / 2.0,
                            p.footprint.origin.row as f64 * config.cell_height() + h / 2.0,
                        )
                    })
                })
                .collect();
            if pts.len() < 2 {
                continue;
            }
            let mut x_lo = f64::MAX;
            let mut x_hi = f64::MIN;
            let mut y_lo = f64::MAX;
            let mut y_hi = f64::MIN;
            for (x, y) in pts {
                x_lo = x_lo.min(x);
                x_hi = x_hi.max(x);
                y_lo = y_lo.min(y);
                y_hi = y_hi.max(y);
            }
            total += net.weight * ((x_hi - x_lo) + (y_hi - y_lo));
        }
        total
    }

    #[test]
    fn two_endpoint_net() {
        // 2 mm chiplets on a 1 mm grid: origin (0,0) -> centre (1,1);
        // origin (4,3) -> centre (4,5).
        let cfg = toy_config(8, 1.0, &[(2.0, 2.0, 1.0), (2.0, 2.0, 1.0)], &[&[0, 1]]);
        let nl = Netlist::new(&cfg);
        let s = PlacementState::new(8)
            .apply_placement(&cfg, 0, CellIndex::new(0, 0), Orientation::R0)
            .unwrap()
            .apply_placement(&cfg, 1, CellIndex::new(4, 3), Orientation::R0)
            .unwrap();
        let rep = hpwl(&s, &cfg, &nl);
        assert!((rep.total_hpwl - 7.0).abs() < 1e-12);
        assert_eq!(rep.per_net.len(), 1);
    }

    #[test]
    fn single_placed_endpoint_contributes_nothing() {
        let cfg = toy_config(8, 1.0, &[(2.0, 2.0, 1.0), (2.0, 2.0, 1.0)], &[&[0, 1]]);
        let nl = Netlist::new(&cfg);
        let s = PlacementState::new(8)
            .apply_placement(&cfg, 0, CellIndex::new(2, 2), Orientation::R0)
            .unwrap();
        assert_eq!(total_hpwl(&s, &cfg, &nl), 0.0);
    }

    #[test]
    fn hpwl_matches_bruteforce_on_random_instances() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..200 {
            let (cfg, state) = random_instance(&mut rng, 8, 5, 3);
            let nl = Netlist::new(&cfg);
            let rep = hpwl(&state, &cfg, &nl);
            let sum: f64 = rep.per_net.values().sum();
            assert!((rep.total_hpwl - sum).abs() <= 1e-9 * rep.total_hpwl.max(1.0));
            assert!((rep.total_hpwl - oracle_hpwl(&state, &cfg)).abs() < 1e-9);
        }
    }

    #[test]
    fn unconnected_chiplet_has_flat_mask() {
        let cfg = toy_config(6, 1.0, &[(2.0, 2.0, 1.0), (2.0, 2.0, 1.0), (1.0, 1.0, 1.0)], &[&[0, 1]]);
        let nl = Netlist::new(&cfg);
        let s = PlacementState::new(6)
            .apply_placement(&cfg, 0, CellIndex::new(0, 0), Orientation::R0)
            .unwrap();
        assert!(wire_deltas(&s, &cfg, &nl, 2, Orientation::R0).iter().all(|&d| d == 0.0));
        let m = wire_mask(&s, &cfg, &nl, 2, Orientation::R0);
        let feasible = feasible_for(&s, &cfg.chiplets[2], Orientation::R0, &cfg);
        for (v, ok) in m.values.iter().zip(feasible) {
            assert_eq!(*v, if ok { 0.0 } else { 1.0 });
        }
    }

    #[test]
    fn incremental_deltas_match_full_recompute() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..50 {
            let (cfg, state) = random_instance(&mut rng, 7, 5, 4);
            let nl = Netlist::new(&cfg);
            let Some(next) = (0..cfg.chiplets.len()).find(|&i| state.find(i).is_none()) else {
                continue;
            };
            let o = if rng.gen_bool(0.5) { Orientation::R0 } else { Orientation::R90 };
            let raw = wire_deltas(&state, &cfg, &nl, next, o);
            let base = oracle_hpwl(&state, &cfg);
            let feasible = feasible_for(&state, &cfg.chiplets[next], o, &cfg);
            for (i, ok) in feasible.iter().enumerate() {
                if !ok {
                    continue;
                }
                let after = state
                    .apply_placement(&cfg, next, CellIndex::from_flat(i, cfg.grid_n), o)
                    .unwrap();
                assert!((raw[i] - (oracle_hpwl(&after, &cfg) - base)).abs() <= 1e-9);
            }
        }
    }

    #[test]
    fn best_cell_is_nearest_to_partner() {
        // Partner 2x2 at (3,3) on an 8x8 grid, next chiplet 1x1.
        let cfg = toy_config(8, 1.0, &[(2.0, 2.0, 1.0), (1.0, 1.0, 1.0)], &[&[0, 1]]);
        let nl = Netlist::new(&cfg);
        let s = PlacementState::new(8)
            .apply_placement(&cfg, 0, CellIndex::new(3, 3), Orientation::R0)
            .unwrap();
        let raw = wire_deltas(&s, &cfg, &nl, 1, Orientation::R0);
        let feasible = feasible_for(&s, &cfg.chiplets[1], Orientation::R0, &cfg);
        let partner = (4.0, 4.0);
        let best_raw = (0..64).filter(|&i| feasible[i]).map(|i| raw[i]).fold(f64::INFINITY, f64::min);
        let best_l1 = (0..64)
            .filter(|&i| feasible[i])
            .map(|i| {
                let c = CellIndex::from_flat(i, 8);
                (c.col as f64 + 0.5 - partner.0).abs() + (c.row as f64 + 0.5 - partner.1).abs()
            })
            .fold(f64::INFINITY, f64::min);
        assert!((best_raw - best_l1).abs() < 1e-12);
        let m = wire_mask(&s, &cfg, &nl, 1, Orientation::R0);
        assert!(m.values.iter().all(|v| (-1.0..=1.0).contains(v)));
        assert!(m.values.iter().any(|&v| v == -1.0));
    }

    #[test]
    fn pair_masks_share_scale() {
        let cfg = toy_config(8, 1.0, &[(2.0, 2.0, 1.0), (3.0, 1.0, 1.0)], &[&[0, 1]]);
        let nl = Netlist::new(&cfg);
        let s = PlacementState::new(8)
            .apply_placement(&cfg, 0, CellIndex::new(0, 0), Orientation::R0)
            .unwrap();
        let f0 = feasible_for(&s, &cfg.chiplets[1], Orientation::R0, &cfg);
        let f1 = feasible_for(&s, &cfg.chiplets[1], Orientation::R90, &cfg);
        let [m0, m1] = wire_mask_pair(&s, &cfg, &nl, 1, [&f0, &f1]);
        let lo = m0.values.iter().chain(&m1.values).copied().fold(f32::INFINITY, f32::min);
        assert_eq!(lo, -1.0);
        let feasible_max = m0
            .values
            .iter()
            .zip(&f0)
            .chain(m1.values.iter().zip(&f1))
            .filter(|(_, &ok)| ok)
            .map(|(&v, _)| v)
            .fold(f32::NEG_INFINITY, f32::max);
        assert_eq!(feasible_max, 1.0);
    }
}
