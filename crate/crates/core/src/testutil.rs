//! Builders shared by unit tests.

use rand::Rng;

use crate::grid::{feasible_for, CellIndex, PlacementState};
use crate::model::{BenchmarkConfig, Chiplet, Net, Orientation, ThermalParams};

pub fn thermal() -> ThermalParams {
    ThermalParams {
        ambient_temp: 45.0,
        lateral_conductance: 1.0,
        vertical_conductance: 0.05,
    }
}

/// Square canvas of `grid_n` cells of `cell_mm`; chiplets are `(w, h, tdp)`
/// named `c0, c1, ...`; nets list chiplet indices.
pub fn toy_config(grid_n: usize, cell_mm: f64, chiplets: &[(f64, f64, f64)], nets: &[&[usize]]) -> BenchmarkConfig {
    BenchmarkConfig {
        name: "toy".into(),
        canvas_width: grid_n as f64 * cell_mm,
        canvas_height: grid_n as f64 * cell_mm,
        grid_n,
        chiplets: chiplets
            .iter()
            .enumerate()
            .map(|(i, &(width, height, tdp))| Chiplet {
                id: format!("c{i}"),
                kind: format!("c{i}"),
                width,
                height,
                tdp,
                rotatable: true,
            })
            .collect(),
        nets: nets
            .iter()
            .enumerate()
            .map(|(i, m)| Net {
                id: format!("n{i}"),
                endpoints: m.iter().map(|&c| format!("c{c}")).collect(),
                weight: 1.0,
            })
            .collect(),
        tdp_threshold: 80.0,
        thermal: thermal(),
        spacing: 0,
    }
}

/// Random small design with a random legal partial placement.
pub fn random_instance(
    rng: &mut impl Rng,
    max_grid: usize,
    max_chiplets: usize,
    max_nets: usize,
) -> (BenchmarkConfig, PlacementState) {
    let grid_n = rng.gen_range(3..=max_grid);
    let k = rng.gen_range(2..=max_chiplets);
    let chiplets: Vec<(f64, f64, f64)> = (0..k)
        .map(|_| {
            (
                rng.gen_range(1..=3) as f64 - rng.gen_range(0.0..0.5),
                rng.gen_range(1..=3) as f64 - rng.gen_range(0.0..0.5),
                rng.gen_range(0.0..200.0),
            )
        })
        .collect();
    let nets: Vec<Vec<usize>> = (0..rng.gen_range(1..=max_nets))
        .map(|_| {
            let mut m: Vec<usize> = (0..k).filter(|_| rng.gen_bool(0.5)).collect();
            while m.len() < 2 {
                let c = rng.gen_range(0..k);
                if !m.contains(&c) {
                    m.push(c);
                }
            }
            m
        })
        .collect();
    let net_refs: Vec<&[usize]> = nets.iter().map(Vec::as_slice).collect();
    let mut cfg = toy_config(grid_n, 1.0, &chiplets, &net_refs);
    for c in &mut cfg.chiplets {
        c.rotatable = rng.gen_bool(0.8);
    }
    for n in &mut cfg.nets {
        n.weight = rng.gen_range(0.5..2.0);
    }

    let mut state = PlacementState::new(grid_n);
    let to_place = rng.gen_range(0..k);
    for idx in 0..to_place {
        let o = if cfg.chiplets[idx].rotatable && rng.gen_bool(0.5) {
            Orientation::R90
        } else {
            Orientation::R0
        };
        let feasible = feasible_for(&state, &cfg.chiplets[idx], o, &cfg);
        let options: Vec<usize> = (0..feasible.len()).filter(|&i| feasible[i]).collect();
        if options.is_empty() {
            break;
        }
        let cell = CellIndex::from_flat(options[rng.gen_range(0..options.len())], grid_n);
        state = state.apply_placement(&cfg, idx, cell, o).unwrap();
    }
    (cfg, state)
}
