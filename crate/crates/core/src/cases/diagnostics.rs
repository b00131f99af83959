//! Run diagnostics: water cut, gravity number, CFL, countercurrent share and
//! the orientation metric.

use alloc::vec::Vec;

use super::{unrotate, Case};
use crate::fluid::FluidModel;
use crate::flux::{region_fluxes, FluxError, FluxEvaluation, RegionState};
use crate::grid::{CartesianGrid, InteractionRegion, DARCY_CONSTANT};
use crate::math;
use crate::solver::{Assembly, Problem, SimState, StepLog};

/// Half interfaces with transmissibility below this fraction of the largest
/// one are ignored by the countercurrent count.
pub const ACTIVE_TRANSMISSIBILITY_FRACTION: f64 = 1e-4;

/// Wetting share of the produced volume; zero when nothing is produced.
pub fn water_cut(q_w: f64, q_nw: f64) -> f64 {
    let total = q_w + q_nw;
    if total > 0.0 {
        (q_w / total).clamp(0.0, 1.0)
    } else {
        0.0
    }
}

/// `N_G = C k g |rho_w - rho_nw| / (mu_w |u_T|)` with `u_T` in ft/day.
pub fn gravity_number(k: f64, fluid: &FluidModel, u_t: f64) -> f64 {
    DARCY_CONSTANT * k * fluid.g * math::abs(fluid.rho_w - fluid.rho_nw) / (fluid.mu_w * math::abs(u_t))
}

/// Evaluates every interaction region at `state`.
pub fn region_flux_field(problem: &Problem, state: &SimState) -> Result<Vec<FluxEvaluation>, FluxError> {
    problem
        .dual
        .regions
        .iter()
        .map(|reg| {
            let st = RegionState {
                p: reg.vertex_cells.map(|c| state.p[c]),
                s: reg.vertex_cells.map(|c| state.s[c]),
            };
            region_fluxes(&problem.scheme, reg, &st, &problem.fluid)
        })
        .collect()
}

/// `dt max_i (sum of outgoing |u_T| over the cell's half interfaces) /
/// (phi_i V_i) * max_S |df_w/dS|`.
pub fn cfl_number(problem: &Problem, field: &[FluxEvaluation], dt: f64) -> f64 {
    let mut out = alloc::vec![0.0; problem.num_cells()];
    for (reg, e) in problem.dual.regions.iter().zip(field) {
        for k in 0..4 {
            let u = e.u_t[k];
            let from = if u >= 0.0 { k } else { InteractionRegion::next(k) };
            out[reg.vertex_cells[from]] += math::abs(u);
        }
    }
    let worst = out
        .iter()
        .enumerate()
        .map(|(i, o)| o / problem.grid.pore_volume(i))
        .fold(0.0, f64::max);
    dt * worst * problem.fluid.max_fractional_flow_slope()
}

/// `(countercurrent, active)` half-interface counts over permeable half
/// interfaces.
pub fn countercurrent_counts(problem: &Problem, field: &[FluxEvaluation]) -> (usize, usize) {
    let t_max = problem
        .dual
        .regions
        .iter()
        .flat_map(|r| r.half_t.iter().copied())
        .fold(0.0, f64::max);
    let cut = ACTIVE_TRANSMISSIBILITY_FRACTION * t_max;
    let mut counter = 0;
    let mut active = 0;
    for (reg, e) in problem.dual.regions.iter().zip(field) {
        for k in 0..4 {
            if reg.half_t[k] <= cut {
                continue;
            }
            active += 1;
            if e.f_w[k] * e.f_nw[k] < 0.0 {
                counter += 1;
            }
        }
    }
    (counter, active)
}

pub fn countercurrent_fraction(problem: &Problem, field: &[FluxEvaluation]) -> f64 {
    match countercurrent_counts(problem, field) {
        (_, 0) => 0.0,
        (c, a) => c as f64 / a as f64,
    }
}

/// Mean absolute saturation difference over the disc between the
/// unrotated run and the run on a grid rotated by `theta`. Each unrotated
/// disc cell is compared with the rotated-run cell containing the same
/// point of the rotated frame.
pub fn orientation_metric(grid: &CartesianGrid, disc: &[bool], s_theta: &[f64], s_zero: &[f64], theta: f64) -> f64 {
    let mut sum = 0.0;
    let mut count = 0usize;
    for (c, _) in disc.iter().enumerate().filter(|(_, d)| **d) {
        let (xp, yp) = grid.center(c);
        let (x, y) = unrotate(xp, yp, theta);
        let other = grid.locate(x, y);
        sum += math::abs(s_theta[other] - s_zero[c]);
        count += 1;
    }
    if count == 0 {
        0.0
    } else {
        sum / count as f64
    }
}

/// Per-step record collected while a case runs.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct StepDiagnostics {
    /// Time in days at the end of the step.
    pub t: f64,
    /// Time in the case's reporting unit.
    pub t_unit: f64,
    pub pvi: f64,
    pub dt: f64,
    pub iterations: usize,
    pub cfl: f64,
    pub countercurrent: f64,
}

#[derive(Debug, Clone, PartialEq, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Diagnostics {
    pub steps: Vec<StepDiagnostics>,
    /// Water cut per producer at each step.
    pub water_cut: Vec<Vec<f64>>,
    pub max_cfl: f64,
    pub gravity_number: f64,
    /// Mean countercurrent fraction over steps in the second half of the run.
    pub countercurrent_second_half: f64,
    pub total_iterations: usize,
    /// Wetting volume balance `|V_end - V_0 - injected| / max(V_0, injected)`.
    pub mass_balance_error: f64,
    pub min_saturation: f64,
    pub max_saturation: f64,
}

/// Accumulates diagnostics from the time-stepping callback.
#[derive(Debug, Clone)]
pub struct Recorder {
    diag: Diagnostics,
    t_end: f64,
    v0: f64,
    net_in: f64,
    error: Option<FluxError>,
}

impl Recorder {
    pub fn new(case: &Case, problem: &Problem, initial: &SimState) -> Self {
        let width = 2.0 * case.disc_radius * case.grid.thickness;
        let k_ref = case.disc.iter().zip(&case.grid.perm).filter(|(d, _)| **d).map(|(_, k)| *k).fold(0.0, f64::max);
        let gravity = if case.injection_rate > 0.0 {
            gravity_number(k_ref, &case.fluid, case.injection_rate / width)
        } else {
            f64::INFINITY
        };
        let (lo, hi) = bounds(&initial.s);
        Self {
            diag: Diagnostics {
                water_cut: alloc::vec![Vec::new(); problem.wells.producers.len()],
                gravity_number: gravity,
                min_saturation: lo,
                max_saturation: hi,
                ..Default::default()
            },
            t_end: case.t_end,
            v0: initial.wetting_volume(&problem.grid),
            net_in: 0.0,
            error: None,
        }
    }

    pub fn record(&mut self, case: &Case, problem: &Problem, log: &StepLog, state: &SimState, work: &Assembly) {
        let rates = work.rates(problem);
        self.net_in += log.dt * rates.net_wetting();
        for (series, q) in self.diag.water_cut.iter_mut().zip(&rates.produced) {
            series.push(water_cut(q.0, q.1));
        }
        let (lo, hi) = bounds(&state.s);
        self.diag.min_saturation = self.diag.min_saturation.min(lo);
        self.diag.max_saturation = self.diag.max_saturation.max(hi);
        let (cfl, cc) = match region_flux_field(problem, state) {
            Ok(field) => (cfl_number(problem, &field, log.dt), countercurrent_fraction(problem, &field)),
            Err(e) => {
                self.error.get_or_insert(e);
                (f64::NAN, f64::NAN)
            }
        };
        self.diag.max_cfl = self.diag.max_cfl.max(cfl);
        self.diag.total_iterations += log.iterations + log.wasted_iterations;
        let pvi = if case.disc_pore_volume > 0.0 {
            log.t * case.injection_rate / case.disc_pore_volume
        } else {
            0.0
        };
        self.diag.steps.push(StepDiagnostics {
            t: log.t,
            t_unit: case.to_unit(log.t),
            pvi,
            dt: log.dt,
            iterations: log.iterations + log.wasted_iterations,
            cfl,
            countercurrent: cc,
        });
        let v = state.wetting_volume(&problem.grid);
        let scale = self.v0.abs().max(self.net_in.abs()).max(f64::MIN_POSITIVE);
        self.diag.mass_balance_error = self.diag.mass_balance_error.max(math::abs(v - self.v0 - self.net_in) / scale);
    }

    pub fn finish(mut self) -> Result<Diagnostics, FluxError> {
        if let Some(e) = self.error {
            return Err(e);
        }
        let half = 0.5 * self.t_end;
        let late: Vec<f64> = self.diag.steps.iter().filter(|s| s.t > half).map(|s| s.countercurrent).collect();
        self.diag.countercurrent_second_half = if late.is_empty() {
            0.0
        } else {
            late.iter().sum::<f64>() / late.len() as f64
        };
        Ok(self.diag)
    }
}

fn bounds(s: &[f64]) -> (f64, f64) {
    s.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| (lo.min(*v), hi.max(*v)))
}
