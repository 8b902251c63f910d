//! Steady-state interposer thermal model.
//!
//! Each cell exchanges heat with its four neighbours through
//! `lateral_conductance` and with ambient through `vertical_conductance`.
//! Canvas edges are adiabatic. In terms of the rise above ambient
//! `θ = T − T_amb` the balance at cell `i` is
//!
//! ```text
//! Σ_{j ∈ nbr4(i)} g_lat (θ_i − θ_j) + g_vert θ_i = P_i
//! ```
//!
//! which is symmetric positive definite and solved by Jacobi-preconditioned
//! conjugate gradient.

use crate::error::{Error, Result};
use crate::grid::{CellIndex, MaskGrid, PlacementState};
use crate::model::{BenchmarkConfig, ThermalParams};

/// Convergence target on `‖Aθ − P‖∞ / ‖P‖∞`.
pub const SOLVER_TOLERANCE: f64 = 1e-10;
/// Largest accepted relative residual.
pub const RESIDUAL_LIMIT: f64 = 1e-8;

#[derive(Debug, Clone, PartialEq)]
pub struct PowerMap {
    pub grid_n: usize,
    /// W per cell, row-major.
    pub values: Vec<f64>,
}

impl PowerMap {
    pub fn zeros(grid_n: usize) -> Self {
        PowerMap {
            grid_n,
            values: vec![0.0; grid_n * grid_n],
        }
    }

    pub fn total(&self) -> f64 {
        self.values.iter().sum()
    }

    pub fn scaled(&self, factor: f64) -> Self {
        PowerMap {
            grid_n: self.grid_n,
            values: self.values.iter().map(|v| v * factor).collect(),
        }
    }

    pub fn add(&self, other: &PowerMap) -> Self {
        PowerMap {
            grid_n: self.grid_n,
            values: self.values.iter().zip(&other.values).map(|(a, b)| a + b).collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ThermalField {
    pub grid_n: usize,
    /// °C per cell, row-major.
    pub temps: Vec<f64>,
    pub hotspot: f64,
    pub hotspot_cell: CellIndex,
    /// Final `‖Aθ − P‖∞ / ‖P‖∞` (0 for zero power).
    pub residual: f64,
    pub iterations: usize,
}

impl ThermalField {
    fn from_rise(rise: &[f64], params: &ThermalParams, grid_n: usize, residual: f64, iterations: usize) -> Self {
        let temps: Vec<f64> = rise.iter().map(|r| params.ambient_temp + r).collect();
        let (arg, hot) = temps
            .iter()
            .copied()
            .enumerate()
            .fold((0, f64::NEG_INFINITY), |(bi, bv), (i, v)| if v > bv { (i, v) } else { (bi, bv) });
        ThermalField {
            grid_n,
            temps,
            hotspot: hot,
            hotspot_cell: CellIndex::from_flat(arg, grid_n),
            residual,
            iterations,
        }
    }
}

/// Each placed chiplet spreads its TDP uniformly over its footprint cells.
pub fn power_map(state: &PlacementState, config: &BenchmarkConfig) -> PowerMap {
    let mut map = PowerMap::zeros(config.grid_n);
    for p in state.placed() {
        let density = config.chiplets[p.chiplet].tdp / p.footprint.cell_count() as f64;
        for cell in p.footprint.cells() {
            map.values[cell.flat(config.grid_n)] += density;
        }
    }
    map
}

/// `Aθ` for the 5-point operator.
pub fn apply_operator(theta: &[f64], grid_n: usize, params: &ThermalParams, out: &mut [f64]) {
    let n = grid_n;
    let (gl, gv) = (params.lateral_conductance, params.vertical_conductance);
    for r in 0..n {
        for c in 0..n {
            let i = r * n + c;
            let t = theta[i];
            let mut acc = gv * t;
            if r > 0 {
                acc += gl * (t - theta[i - n]);
            }
            if r + 1 < n {
                acc += gl * (t - theta[i + n]);
            }
            if c > 0 {
                acc += gl * (t - theta[i - 1]);
            }
            if c + 1 < n {
                acc += gl * (t - theta[i + 1]);
            }
            out[i] = acc;
        }
    }
}

fn inf_norm(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |m, x| m.max(x.abs()))
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Relative residual `‖Aθ − P‖∞ / ‖P‖∞` of a rise field.
pub fn relative_residual(rise: &[f64], power: &PowerMap, params: &ThermalParams) -> f64 {
    let mut ax = vec![0.0; rise.len()];
    apply_operator(rise, power.grid_n, params, &mut ax);
    let num = ax.iter().zip(&power.values).fold(0.0, |m: f64, (a, b)| m.max((a - b).abs()));
    let den = inf_norm(&power.values);
    if den == 0.0 {
        num
    } else {
        num / den
    }
}

/// Conjugate-gradient solver. Optionally keeps the previous solution as the
/// starting guess for the next solve; one instance belongs to one worker.
#[derive(Debug, Clone)]
pub struct ThermalSolver {
    params: ThermalParams,
    grid_n: usize,
    pub max_iterations: usize,
    pub warm_start: bool,
    last_rise: Option<Vec<f64>>,
}

impl ThermalSolver {
    pub fn new(params: ThermalParams, grid_n: usize) -> Self {
        ThermalSolver {
            params,
            grid_n,
            max_iterations: 20 * grid_n * grid_n + 100,
            warm_start: true,
            last_rise: None,
        }
    }

    pub fn params(&self) -> &ThermalParams {
        &self.params
    }

    pub fn reset(&mut self) {
        self.last_rise = None;
    }

    pub fn solve(&mut self, power: &PowerMap) -> Result<ThermalField> {
        let n = self.grid_n;
        let len = n * n;
        let p_norm = inf_norm(&power.values);
        if p_norm == 0.0 {
            self.last_rise = Some(vec![0.0; len]);
            return Ok(ThermalField::from_rise(&vec![0.0; len], &self.params, n, 0.0, 0));
        }

        let (gl, gv) = (self.params.lateral_conductance, self.params.vertical_conductance);
        let inv_diag: Vec<f64> = (0..len)
            .map(|i| {
                let (r, c) = (i / n, i % n);
                let deg = (r > 0) as usize + (r + 1 < n) as usize + (c > 0) as usize + (c + 1 < n) as usize;
                1.0 / (gv + gl * deg as f64)
            })
            .collect();

        let mut x = match (&self.last_rise, self.warm_start) {
            (Some(prev), true) if prev.len() == len => prev.clone(),
            _ => vec![0.0; len],
        };
        let mut ax = vec![0.0; len];
        let mut iterations = 0;
        let target = SOLVER_TOLERANCE * p_norm;

        // Outer loop restarts from the true residual if recursive-residual
        // drift leaves it above the target.
        loop {
            apply_operator(&x, n, &self.params, &mut ax);
            let mut r: Vec<f64> = power.values.iter().zip(&ax).map(|(b, a)| b - a).collect();
            if inf_norm(&r) <= target {
                break;
            }
            if iterations >= self.max_iterations {
                return Err(Error::ThermalNonConvergence {
                    iterations,
                    residual: inf_norm(&r) / p_norm,
                });
            }
            let mut z: Vec<f64> = r.iter().zip(&inv_diag).map(|(a, d)| a * d).collect();
            let mut p = z.clone();
            let mut rz = dot(&r, &z);
            while iterations < self.max_iterations {
                iterations += 1;
                apply_operator(&p, n, &self.params, &mut ax);
                let alpha = rz / dot(&p, &ax);
                for i in 0..len {
                    x[i] += alpha * p[i];
                    r[i] -= alpha * ax[i];
                }
                if inf_norm(&r) <= 0.1 * target {
                    break;
                }
                for i in 0..len {
                    z[i] = r[i] * inv_diag[i];
                }
                let rz_next = dot(&r, &z);
                let beta = rz_next / rz;
                rz = rz_next;
                for i in 0..len {
                    p[i] = z[i] + beta * p[i];
                }
            }
        }

        let residual = relative_residual(&x, power, &self.params);
        let field = ThermalField::from_rise(&x, &self.params, n, residual, iterations);
        self.last_rise = Some(x);
        Ok(field)
    }
}

pub fn solve_steady_state(power: &PowerMap, params: &ThermalParams) -> Result<ThermalField> {
    ThermalSolver::new(*params, power.grid_n).solve(power)
}

pub fn thermal_field(state: &PlacementState, config: &BenchmarkConfig) -> Result<ThermalField> {
    solve_steady_state(&power_map(state, config), &config.thermal)
}

/// Hotspot temperature in °C; ambient for an empty state.
pub fn hotspot(state: &PlacementState, config: &BenchmarkConfig) -> Result<f64> {
    Ok(thermal_field(state, config)?.hotspot)
}

/// Field min-max mapped onto [−1, 1]; a uniform field maps to all −1.
pub fn thermal_mask_from_field(field: &ThermalField) -> MaskGrid {
    let lo = field.temps.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = field.hotspot;
    let span = hi - lo;
    let values = if span > 0.0 {
        field
            .temps
            .iter()
            .map(|&t| (2.0 * (t - lo) / span - 1.0).clamp(-1.0, 1.0) as f32)
            .collect()
    } else {
        vec![-1.0; field.temps.len()]
    };
    MaskGrid {
        grid_n: field.grid_n,
        values,
    }
}

pub fn thermal_mask(state: &PlacementState, config: &BenchmarkConfig) -> Result<MaskGrid> {
    Ok(thermal_mask_from_field(&thermal_field(state, config)?))
}

/// Rescales both conductances so that the mean hotspot over `layouts` hits
/// `target_hotspot`. Their ratio (the lateral spreading length) is kept.
/// The system is linear in 1/g, so one pass is exact.
pub fn calibrate_conductances(
    config: &BenchmarkConfig,
    layouts: &[PlacementState],
    target_hotspot: f64,
) -> Result<ThermalParams> {
    let target_rise = target_hotspot - config.thermal.ambient_temp;
    if layouts.is_empty() || !(target_rise > 0.0) {
        return Err(Error::config(
            "target_hotspot",
            "needs at least one layout and a target above ambient",
        ));
    }
    let mut sum = 0.0;
    for s in layouts {
        sum += hotspot(s, config)? - config.thermal.ambient_temp;
    }
    let mean_rise = sum / layouts.len() as f64;
    if mean_rise <= 0.0 {
        return Err(Error::config("chiplets", "reference layouts dissipate no power"));
    }
    let scale = mean_rise / target_rise;
    Ok(ThermalParams {
        ambient_temp: config.thermal.ambient_temp,
        lateral_conductance: config.thermal.lateral_conductance * scale,
        vertical_conductance: config.thermal.vertical_conductance * scale,
    })
}
