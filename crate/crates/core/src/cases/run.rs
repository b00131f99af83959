//! Runs a case to completion with a given scheme.

use alloc::vec::Vec;

use super::diagnostics::{Diagnostics, Recorder};
use super::{Case, CaseError};
use crate::flux::SchemeConfig;
use crate::solver::{advance, AdvanceSummary, Assembly, LinearSolver, NewtonConfig, SimState, SolverError, StepLog};

#[derive(Debug, Clone)]
pub struct RunOutcome {
    pub summary: AdvanceSummary,
    pub diagnostics: Diagnostics,
    pub final_state: SimState,
}

/// Newton settings for `case` with its nominal step.
pub fn newton_config(case: &Case, base: &NewtonConfig) -> NewtonConfig {
    NewtonConfig { dt: case.dt, ..*base }
}

/// Simulates `case` from its initial state. `observe` sees every accepted
/// step after the diagnostics have been recorded.
pub fn run_case<L, F>(
    case: &Case,
    scheme: SchemeConfig,
    base: &NewtonConfig,
    lin: &mut L,
    mut observe: F,
) -> Result<RunOutcome, CaseError>
where
    L: LinearSolver + ?Sized,
    F: FnMut(&StepLog, &SimState, &Assembly),
{
    let problem = case.problem(scheme)?;
    let cfg = newton_config(case, base);
    let mut state = case.initial.clone();
    let mut rec = Recorder::new(case, &problem, &state);
    let summary = advance(&problem, &mut state, case.t_end, &cfg, lin, |log, st, work| {
        rec.record(case, &problem, log, st, work);
        observe(log, st, work);
    })?;
    let diagnostics = rec.finish().map_err(SolverError::from)?;
    Ok(RunOutcome {
        summary,
        diagnostics,
        final_state: state,
    })
}

/// Saturation snapshots at the requested times in days, taken at the first
/// accepted step reaching each time.
pub fn snapshot_times(times: &[f64]) -> SnapshotCollector {
    SnapshotCollector {
        times: times.to_vec(),
        taken: Vec::new(),
    }
}

#[derive(Debug, Clone)]
pub struct SnapshotCollector {
    times: Vec<f64>,
    /// `(requested time, actual time, saturation)`.
    pub taken: Vec<(f64, f64, Vec<f64>)>,
}

impl SnapshotCollector {
    pub fn observe(&mut self, log: &StepLog, state: &SimState) {
        while let Some(&t) = self.times.get(self.taken.len()) {
            if log.t + 1e-9 * log.dt < t {
                break;
            }
            self.taken.push((t, log.t, state.s.clone()));
        }
    }
}
