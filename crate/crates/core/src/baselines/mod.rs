//! Comparison methods: simulated annealing, random search and the
//! single-agent weighted-sum RL placer.

pub mod random;
pub mod sa;
pub mod single;

use crate::error::Result;
use crate::grid::PlacementState;
use crate::model::{BenchmarkConfig, Netlist};
use crate::thermal::hotspot;
use crate::wirelength::total_hpwl;

pub use random::{random_layout, random_search, RandomSearchResult};
pub use sa::{metropolis_accept, sa_search, SaConfig, SaResult};
pub use single::{single_agent_mode, single_agent_rl};

/// A complete layout with its (HPWL mm, hotspot °C).
#[derive(Debug, Clone, PartialEq)]
pub struct Evaluated {
    pub state: PlacementState,
    pub wl: f64,
    pub temp: f64,
}

impl Evaluated {
    pub fn of(state: PlacementState, config: &BenchmarkConfig, netlist: &Netlist) -> Result<Self> {
        let wl = total_hpwl(&state, config, netlist);
        let temp = hotspot(&state, config)?;
        Ok(Evaluated { state, wl, temp })
    }
}
