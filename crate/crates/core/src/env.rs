//! The placement MDP.
//!
//! Chiplets are placed one per step in [`placement_order`]. Every step the
//! environment routes the next chiplet to an agent role, assembles that
//! role's mask stack, and after the placement reports the wirelength and
//! hotspot deltas as rewards.
//!
//! Observation channel order is fixed:
//!
//! | role    | channels                                                 |
//! |---------|----------------------------------------------------------|
//! | Thermal | view, position, rotation_position, thermal               |
//! | Wire    | view, position, rotation_position, wire_r0, wire_r90     |
//! | Single  | view, position, rotation_position, thermal, wire_r0, wire_r90 |

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{feasible_for, view_mask, CellIndex, PlacementState};
use crate::model::{placement_order, BenchmarkConfig, Netlist, Orientation};
use crate::thermal::{power_map, thermal_mask_from_field, ThermalField, ThermalSolver};
use crate::wirelength::{total_hpwl, wire_mask_pair};

/// Default per-step thermal reward scale, °C.
pub const DEFAULT_THERMAL_SCALE: f64 = 25.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum AgentRole {
    Thermal,
    Wire,
    /// The weighted-sum baseline agent that sees every mask.
    Single,
}

impl AgentRole {
    pub fn channel_count(self) -> usize {
        match self {
            AgentRole::Thermal => 4,
            AgentRole::Wire => 5,
            AgentRole::Single => 6,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            AgentRole::Thermal => "thermal",
            AgentRole::Wire => "wire",
            AgentRole::Single => "single",
        }
    }
}

impl std::fmt::Display for AgentRole {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

/// TDP navigator: chiplets at or above `threshold` go to the thermal agent.
pub fn route(tdp: f64, threshold: f64) -> AgentRole {
    if tdp >= threshold {
        AgentRole::Thermal
    } else {
        AgentRole::Wire
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum EnvMode {
    /// Two agents, chiplets routed by TDP.
    Navigator,
    /// One agent, reward `wire_weight * r_wire + thermal_weight * r_thermal`.
    SingleAgent {
        wire_weight: f64,
        thermal_weight: f64,
        /// Zero the thermal channel of the observation.
        zero_thermal_channels: bool,
    },
}

impl EnvMode {
    pub fn single_default() -> Self {
        EnvMode::SingleAgent {
            wire_weight: 0.7,
            thermal_weight: 0.3,
            zero_thermal_channels: false,
        }
    }

    pub fn roles(&self) -> &'static [AgentRole] {
        match self {
            EnvMode::Navigator => &[AgentRole::Thermal, AgentRole::Wire],
            EnvMode::SingleAgent { .. } => &[AgentRole::Single],
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RewardScales {
    /// mm
    pub wire: f64,
    /// °C
    pub thermal: f64,
}

impl RewardScales {
    /// Wire scale bounds one step's HPWL growth: canvas half-perimeter ×
    /// largest net degree × largest net weight.
    pub fn for_config(config: &BenchmarkConfig, netlist: &Netlist) -> Self {
        RewardScales {
            wire: (config.canvas_width + config.canvas_height) * netlist.max_degree() as f64 * netlist.max_weight(),
            thermal: DEFAULT_THERMAL_SCALE,
        }
    }
}

/// `clamp(1 + raw / scale, 0, 1)`; raw rewards are non-positive in practice.
pub fn normalize_reward(raw: f64, scale: f64) -> f64 {
    if raw == 0.0 {
        return 1.0;
    }
    (1.0 + raw / scale.max(f64::MIN_POSITIVE)).clamp(0.0, 1.0)
}

/// Action index `< N²` places at that cell unrotated, the rest rotated.
pub fn decode_action(action: usize, grid_n: usize) -> (CellIndex, Orientation) {
    let n2 = grid_n * grid_n;
    if action < n2 {
        (CellIndex::from_flat(action, grid_n), Orientation::R0)
    } else {
        (CellIndex::from_flat(action - n2, grid_n), Orientation::R90)
    }
}

pub fn encode_action(cell: CellIndex, orientation: Orientation, grid_n: usize) -> usize {
    orientation.index() * grid_n * grid_n + cell.flat(grid_n)
}

#[derive(Debug, Clone, PartialEq)]
pub struct Observation {
    pub grid_n: usize,
    pub role: AgentRole,
    pub step_index: usize,
    pub chiplet: usize,
    pub channels: usize,
    /// `channels x N x N`, channel-major.
    pub data: Vec<f32>,
    /// `2N²` flags in action order.
    pub feasible: Vec<bool>,
}

impl Observation {
    pub fn channel(&self, i: usize) -> &[f32] {
        let n2 = self.grid_n * self.grid_n;
        &self.data[i * n2..(i + 1) * n2]
    }

    pub fn feasible_count(&self) -> usize {
        self.feasible.iter().filter(|&&f| f).count()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct StepResult {
    pub chiplet: usize,
    pub role: AgentRole,
    pub action: usize,
    pub cell: CellIndex,
    pub orientation: Orientation,
    /// Normalized reward for the acting role, in [0, 1].
    pub reward: f64,
    /// Un-normalized reward for the acting role.
    pub raw_reward: f64,
    /// WL_k − WL_{k−1}, mm.
    pub raw_wl_delta: f64,
    /// T_k − T_{k−1}, °C.
    pub raw_temp_delta: f64,
    pub wire_reward: f64,
    pub thermal_reward: f64,
    pub wl: f64,
    pub temp: f64,
    pub done: bool,
    /// The next chiplet has no legal cell; the episode ends early.
    pub deadlock: bool,
    pub observation: Option<Observation>,
}

/// One row of an episode trace.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StepRecord {
    pub step: usize,
    pub chiplet: String,
    pub agent: AgentRole,
    pub action: usize,
    pub row: usize,
    pub col: usize,
    pub orientation: Orientation,
    pub raw_reward: f64,
    pub reward: f64,
    pub raw_wire_reward: f64,
    pub raw_thermal_reward: f64,
    pub wl: f64,
    pub temp: f64,
}

impl StepRecord {
    pub fn from_result(step: usize, config: &BenchmarkConfig, r: &StepResult) -> Self {
        StepRecord {
            step,
            chiplet: config.chiplets[r.chiplet].id.clone(),
            agent: r.role,
            action: r.action,
            row: r.cell.row,
            col: r.cell.col,
            orientation: r.orientation,
            raw_reward: r.raw_reward,
            reward: r.reward,
            raw_wire_reward: -r.raw_wl_delta,
            raw_thermal_reward: -r.raw_temp_delta,
            wl: r.wl,
            temp: r.temp,
        }
    }
}

pub struct PlacementEnv {
    config: Arc<BenchmarkConfig>,
    netlist: Arc<Netlist>,
    order: Vec<usize>,
    mode: EnvMode,
    scales: RewardScales,
    solver: ThermalSolver,
    state: PlacementState,
    field: ThermalField,
    wl: f64,
    seed: u64,
    current: Option<Observation>,
    done: bool,
}

impl PlacementEnv {
    pub fn new(config: Arc<BenchmarkConfig>, mode: EnvMode) -> Result<Self> {
        config.validate()?;
        let netlist = Arc::new(Netlist::new(&config));
        let scales = RewardScales::for_config(&config, &netlist);
        let mut solver = ThermalSolver::new(config.thermal, config.grid_n);
        let empty = PlacementState::new(config.grid_n);
        let field = solver.solve(&power_map(&empty, &config))?;
        Ok(PlacementEnv {
            order: placement_order(&config),
            netlist,
            mode,
            scales,
            solver,
            state: empty,
            field,
            wl: 0.0,
            seed: 0,
            current: None,
            done: true,
            config,
        })
    }

    pub fn config(&self) -> &BenchmarkConfig {
        &self.config
    }

    pub fn netlist(&self) -> &Netlist {
        &self.netlist
    }

    pub fn order(&self) -> &[usize] {
        &self.order
    }

    pub fn mode(&self) -> EnvMode {
        self.mode
    }

    pub fn scales(&self) -> RewardScales {
        self.scales
    }

    pub fn set_scales(&mut self, scales: RewardScales) {
        self.scales = scales;
    }

    pub fn state(&self) -> &PlacementState {
        &self.state
    }

    pub fn field(&self) -> &ThermalField {
        &self.field
    }

    pub fn wirelength(&self) -> f64 {
        self.wl
    }

    pub fn hotspot(&self) -> f64 {
        self.field.hotspot
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn is_done(&self) -> bool {
        self.done
    }

    pub fn role_for(&self, chiplet: usize) -> AgentRole {
        match self.mode {
            EnvMode::Navigator => route(self.config.chiplets[chiplet].tdp, self.config.tdp_threshold),
            EnvMode::SingleAgent { .. } => AgentRole::Single,
        }
    }

    /// Starts a new episode. The episode itself is deterministic; the seed
    /// is recorded for provenance.
    pub fn reset(&mut self, seed: u64) -> Result<Observation> {
        self.seed = seed;
        self.state = PlacementState::new(self.config.grid_n);
        self.solver.reset();
        self.field = self.solver.solve(&power_map(&self.state, &self.config))?;
        self.wl = 0.0;
        self.done = false;
        let obs = self.observe().ok_or_else(|| Error::PlacementDeadlock {
            chiplet: self.config.chiplets[self.order[0]].id.clone(),
            step: 0,
        })?;
        self.current = Some(obs.clone());
        Ok(obs)
    }

    pub fn current_observation(&self) -> Option<&Observation> {
        self.current.as_ref()
    }

    /// Observation for the chiplet at the cursor; `None` when it has no
    /// legal cell.
    fn observe(&self) -> Option<Observation> {
        let step = self.state.cursor();
        let chiplet = self.order[step];
        let role = self.role_for(chiplet);
        let c = &self.config.chiplets[chiplet];
        let n = self.config.grid_n;
        let n2 = n * n;

        let f0 = feasible_for(&self.state, c, Orientation::R0, &self.config);
        let f1 = feasible_for(&self.state, c, Orientation::R90, &self.config);
        if !f0.iter().chain(&f1).any(|&f| f) {
            return None;
        }

        let channels = role.channel_count();
        let mut data = Vec::with_capacity(channels * n2);
        data.extend(view_mask(&self.state).values);
        data.extend(f0.iter().map(|&b| if b { 1.0f32 } else { -1.0 }));
        data.extend(f1.iter().map(|&b| if b { 1.0f32 } else { -1.0 }));
        if matches!(role, AgentRole::Thermal | AgentRole::Single) {
            let zero = matches!(
                self.mode,
                EnvMode::SingleAgent {
                    zero_thermal_channels: true,
                    ..
                }
            );
            if zero {
                data.extend(std::iter::repeat_n(0.0f32, n2));
            } else {
                data.extend(thermal_mask_from_field(&self.field).values);
            }
        }
        if matches!(role, AgentRole::Wire | AgentRole::Single) {
            let [w0, w1] = wire_mask_pair(&self.state, &self.config, &self.netlist, chiplet, [&f0, &f1]);
            data.extend(w0.values);
            data.extend(w1.values);
        }
        debug_assert_eq!(data.len(), channels * n2);

        let mut feasible = f0;
        feasible.extend(f1);
        Some(Observation {
            grid_n: n,
            role,
            step_index: step,
            chiplet,
            channels,
            data,
            feasible,
        })
    }

    pub fn step(&mut self, action: usize) -> Result<StepResult> {
        let obs = match (&self.current, self.done) {
            (Some(o), false) => o,
            _ => return Err(Error::MaskedActionViolation("step called on a finished episode".into())),
        };
        if action >= obs.feasible.len() || !obs.feasible[action] {
            return Err(Error::MaskedActionViolation(format!(
                "action {action} is masked for {}",
                self.config.chiplets[obs.chiplet].id
            )));
        }
        let chiplet = obs.chiplet;
        let role = obs.role;
        let (cell, orientation) = decode_action(action, self.config.grid_n);

        self.state = self.state.apply_placement(&self.config, chiplet, cell, orientation)?;
        let wl = total_hpwl(&self.state, &self.config, &self.netlist);
        let field = self.solver.solve(&power_map(&self.state, &self.config))?;
        let raw_wl_delta = wl - self.wl;
        let raw_temp_delta = field.hotspot - self.field.hotspot;
        self.wl = wl;
        self.field = field;

        let wire_raw = -raw_wl_delta;
        let thermal_raw = -raw_temp_delta;
        let wire_reward = normalize_reward(wire_raw, self.scales.wire);
        let thermal_reward = normalize_reward(thermal_raw, self.scales.thermal);
        let (reward, raw_reward) = match (role, self.mode) {
            (AgentRole::Thermal, _) => (thermal_reward, thermal_raw),
            (AgentRole::Wire, _) => (wire_reward, wire_raw),
            (
                AgentRole::Single,
                EnvMode::SingleAgent {
                    wire_weight,
                    thermal_weight,
                    ..
                },
            ) => (
                wire_weight * wire_reward + thermal_weight * thermal_reward,
                wire_weight * wire_raw + thermal_weight * thermal_raw,
            ),
            (AgentRole::Single, EnvMode::Navigator) => unreachable!("navigator never routes to the single role"),
        };

        let finished = self.state.cursor() == self.order.len();
        let (observation, deadlock) = if finished {
            (None, false)
        } else {
            match self.observe() {
                Some(o) => (Some(o), false),
                None => (None, true),
            }
        };
        self.done = finished || deadlock;
        self.current = observation.clone();

        Ok(StepResult {
            chiplet,
            role,
            action,
            cell,
            orientation,
            reward,
            raw_reward,
            raw_wl_delta,
            raw_temp_delta,
            wire_reward,
            thermal_reward,
            wl,
            temp: self.field.hotspot,
            done: self.done,
            deadlock,
            observation,
        })
    }
}

/// (total HPWL mm, hotspot °C) of a finished layout.
pub fn episode_metrics(state: &PlacementState, config: &BenchmarkConfig) -> Result<(f64, f64)> {
    let netlist = Netlist::new(config);
    Ok((
        total_hpwl(state, config, &netlist),
        crate::thermal::hotspot(state, config)?,
    ))
}
