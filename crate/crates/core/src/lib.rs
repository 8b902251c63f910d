//! Thermal- and wirelength-aware chiplet placement on a 2.5D interposer.
//!
//! Chiplets are placed one per step on an `N x N` grid in TDP-descending
//! order. A TDP threshold routes every chiplet either to a thermal agent
//! (rewarded for keeping the hotspot low) or to a wirelength agent
//! (rewarded for keeping HPWL low); both are trained with PPO. Simulated
//! annealing, random search and a single weighted-sum agent serve as
//! baselines, and results are compared through Pareto fronts over
//! (wirelength, hotspot temperature).

pub mod agents;
pub mod analysis;
pub mod baselines;
pub mod env;
pub mod error;
pub mod grid;
pub mod io;
pub mod model;
pub mod thermal;
pub mod wirelength;

#[cfg(test)]
mod testutil;

pub use error::{Error, Result};
