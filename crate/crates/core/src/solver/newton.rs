//! Damped Newton iteration and time stepping.

use alloc::vec::Vec;

use super::assemble::{assemble, Assembly};
use super::linear::LinearSolver;
use super::{NewtonConfig, Problem, SimState, SolverError};
use crate::math;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NewtonOutcome {
    pub converged: bool,
    /// Number of linear solves performed.
    pub iterations: usize,
    pub residual: f64,
}

/// Applies `U += tau dU`: `tau = 1` on pressures, and on saturations
/// `tau = min(1, ds_max / |dS|)` cell by cell.
pub fn damped_update(state: &mut SimState, delta: &[f64], ds_max: f64) {
    for i in 0..state.p.len() {
        state.p[i] += delta[2 * i];
        let ds = delta[2 * i + 1];
        let a = math::abs(ds);
        let tau = if a <= ds_max { 1.0 } else { ds_max / a };
        state.s[i] += tau * ds;
    }
}

/// Runs Newton on one time step starting from `state`. On return `work`
/// holds the assembly at the final iterate.
pub fn newton_solve<L: LinearSolver + ?Sized>(
    problem: &Problem,
    state: &mut SimState,
    prev: &SimState,
    dt: f64,
    cfg: &NewtonConfig,
    lin: &mut L,
    work: &mut Assembly,
) -> Result<NewtonOutcome, SolverError> {
    let mut rhs = alloc::vec![0.0; 2 * problem.num_cells()];
    for it in 0..=cfg.max_iters {
        assemble(problem, state, prev, dt, work)?;
        let residual = work.norm;
        if !residual.is_finite() {
            return Ok(NewtonOutcome {
                converged: false,
                iterations: it,
                residual,
            });
        }
        if residual <= cfg.tol {
            return Ok(NewtonOutcome {
                converged: true,
                iterations: it,
                residual,
            });
        }
        if it == cfg.max_iters {
            return Ok(NewtonOutcome {
                converged: false,
                iterations: it,
                residual,
            });
        }
        for (r, v) in rhs.iter_mut().zip(&work.residual) {
            *r = -v;
        }
        let delta = lin.solve(&work.jacobian, &rhs)?;
        damped_update(state, &delta, cfg.ds_max);
    }
    unreachable!("loop returns on its last iteration")
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepLog {
    pub step: usize,
    /// Time at the end of the step.
    pub t: f64,
    pub dt: f64,
    /// Iterations of the accepted attempt.
    pub iterations: usize,
    /// Iterations spent in rejected attempts.
    pub wasted_iterations: usize,
    pub chops: usize,
    pub residual: f64,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct AdvanceSummary {
    pub steps: Vec<StepLog>,
    pub total_iterations: usize,
    pub total_chops: usize,
    pub final_time: f64,
}

/// Marches from `t = 0` to `t_end` with the nominal step `cfg.dt`. A failed
/// Newton solve (or a singular linear system) halves the step and retries
/// from the previous state; the next step starts again from `cfg.dt`.
/// `on_step` sees every accepted state with the assembly evaluated there.
pub fn advance<L, F>(
    problem: &Problem,
    state: &mut SimState,
    t_end: f64,
    cfg: &NewtonConfig,
    lin: &mut L,
    mut on_step: F,
) -> Result<AdvanceSummary, SolverError>
where
    L: LinearSolver + ?Sized,
    F: FnMut(&StepLog, &SimState, &Assembly),
{
    cfg.validate()?;
    let mut work = Assembly::new(problem);
    let mut summary = AdvanceSummary::default();
    let mut t = 0.0;
    let min_dt = cfg.dt * cfg.min_dt_fraction;
    let mut prev = state.clone();
    while t_end - t > 1e-9 * cfg.dt {
        let remaining = t_end - t;
        let mut dt = if remaining < cfg.dt * (1.0 + 1e-9) {
            remaining
        } else {
            cfg.dt
        };
        let mut chops = 0;
        let mut wasted = 0;
        prev.clone_from(state);
        loop {
            let attempt = newton_solve(problem, state, &prev, dt, cfg, lin, &mut work);
            let outcome = match attempt {
                Ok(o) => o,
                Err(SolverError::SingularMatrix { .. }) | Err(SolverError::LinearSolver(_)) => NewtonOutcome {
                    converged: false,
                    iterations: cfg.max_iters,
                    residual: f64::NAN,
                },
                Err(e) => return Err(e),
            };
            if outcome.converged {
                t += dt;
                let log = StepLog {
                    step: summary.steps.len(),
                    t,
                    dt,
                    iterations: outcome.iterations,
                    wasted_iterations: wasted,
                    chops,
                    residual: outcome.residual,
                };
                summary.total_iterations += outcome.iterations + wasted;
                summary.total_chops += chops;
                on_step(&log, state, &work);
                summary.steps.push(log);
                break;
            }
            wasted += outcome.iterations;
            state.clone_from(&prev);
            dt *= cfg.chop_factor;
            chops += 1;
            if dt < min_dt {
                return Err(SolverError::TimeStepTooSmall { t, min_dt });
            }
        }
    }
    summary.final_time = t;
    Ok(summary)
}
