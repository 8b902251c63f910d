//! Random search: independent uniformly-random legal layouts.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::Evaluated;
use crate::error::{Error, Result};
use crate::grid::{feasible_for, CellIndex, PlacementState};
use crate::model::{placement_order, BenchmarkConfig, Netlist, Orientation};

/// Attempts per layout before giving up on a config that keeps deadlocking.
pub const MAX_RETRIES: usize = 1000;

/// Places every chiplet in `order`, each at a uniformly chosen feasible
/// (cell, orientation). Restarts from scratch on deadlock.
pub fn random_layout(config: &BenchmarkConfig, order: &[usize], rng: &mut impl Rng) -> Result<PlacementState> {
    let n = config.grid_n;
    'attempt: for _ in 0..MAX_RETRIES {
        let mut state = PlacementState::new(n);
        for &c in order {
            let chiplet = &config.chiplets[c];
            let mut options = Vec::new();
            for o in Orientation::ALL {
                let f = feasible_for(&state, chiplet, o, config);
                options.extend(f.iter().enumerate().filter(|x| *x.1).map(|(i, _)| (i, o)));
            }
            if options.is_empty() {
                continue 'attempt;
            }
            let (cell, o) = options[rng.gen_range(0..options.len())];
            state = state.apply_placement(config, c, CellIndex::from_flat(cell, n), o)?;
        }
        return Ok(state);
    }
    Err(Error::NoLegalLayout(MAX_RETRIES))
}

#[derive(Debug, Clone)]
pub struct RandomSearchResult {
    /// Every sampled layout, in sampling order.
    pub points: Vec<Evaluated>,
    pub best_wl: usize,
    pub best_temp: usize,
}

impl RandomSearchResult {
    pub fn best_by_wl(&self) -> &Evaluated {
        &self.points[self.best_wl]
    }

    pub fn best_by_temp(&self) -> &Evaluated {
        &self.points[self.best_temp]
    }
}

/// Samples `budget` independent layouts.
pub fn random_search(config: &BenchmarkConfig, budget: usize, seed: u64) -> Result<RandomSearchResult> {
    if budget == 0 {
        return Err(Error::config("budget", "must be at least 1"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let order = placement_order(config);
    let netlist = Netlist::new(config);
    let mut points = Vec::with_capacity(budget);
    for _ in 0..budget {
        let state = random_layout(config, &order, &mut rng)?;
        points.push(Evaluated::of(state, config, &netlist)?);
    }
    let argmin = |key: fn(&Evaluated) -> f64| {
        (0..points.len())
            .min_by(|&a, &b| key(&points[a]).total_cmp(&key(&points[b])))
            .unwrap()
    };
    let best_wl = argmin(|e| e.wl);
    let best_temp = argmin(|e| e.temp);
    Ok(RandomSearchResult {
        points,
        best_wl,
        best_temp,
    })
}
