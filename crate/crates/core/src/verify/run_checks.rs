//! Checks on assembled systems and completed runs.

use alloc::format;
use alloc::vec::Vec;

use super::CheckReport;
use crate::cases::diagnostics::Diagnostics;
use crate::fluid::FluidModel;
use crate::flux::{Scheme, SchemeConfig};
use crate::grid::{CartesianGrid, GridSpec, GRAVITY_PSI};
use crate::math;
use crate::solver::{assemble, Assembly, FixedPressure, Injector, Problem, Producer, SimState, WellSet};

pub const BOUND_TOLERANCE: f64 = 1e-9;
pub const MASS_TOLERANCE: f64 = 1e-8;
pub const JACOBIAN_TOLERANCE: f64 = 1e-6;

/// Central-difference check of the assembled Jacobian at `state`.
pub fn fd_assembled_jacobian(problem: &Problem, state: &SimState, prev: &SimState, dt: f64, step: f64) -> CheckReport {
    let mut report = CheckReport::new(
        &format!("fd_assembled_jacobian[{}]", problem.scheme.scheme.name()),
        JACOBIAN_TOLERANCE,
        None,
    );
    let mut work = Assembly::new(problem);
    if let Err(e) = assemble(problem, state, prev, dt, &mut work) {
        report.record(f64::INFINITY, || format!("assembly failed: {e}"));
        return report;
    }
    let dense = work.jacobian.to_dense();
    let r0 = work.residual.clone();
    let noise = 8.0 * f64::EPSILON * r0.iter().fold(1.0f64, |m, v| m.max(math::abs(*v))) / step;
    let n = problem.num_cells();
    let mut lo_res: Vec<f64>;
    for col in 0..2 * n {
        let (mut lo, mut hi) = (state.clone(), state.clone());
        let (cell, unk) = (col / 2, col % 2);
        if unk == 0 {
            lo.p[cell] -= step;
            hi.p[cell] += step;
        } else {
            lo.s[cell] -= step;
            hi.s[cell] += step;
        }
        if let Err(e) = assemble(problem, &lo, prev, dt, &mut work) {
            report.record(f64::INFINITY, || format!("assembly failed: {e}"));
            return report;
        }
        lo_res = work.residual.clone();
        if let Err(e) = assemble(problem, &hi, prev, dt, &mut work) {
            report.record(f64::INFINITY, || format!("assembly failed: {e}"));
            return report;
        }
        for (row, (a, b)) in lo_res.iter().zip(&work.residual).enumerate() {
            let fd = (b - a) / (2.0 * step);
            let an = dense[row][col];
            let scale = math::abs(fd).max(math::abs(an)).max(noise / JACOBIAN_TOLERANCE);
            let rel = math::abs(fd - an) / scale;
            report.record(rel, || format!("row {row} column {col}: analytic {an:e} difference {fd:e}"));
        }
    }
    report
}

/// Every recorded state within `[-1e-9, 1 + 1e-9]`.
pub fn saturation_bounds(diag: &Diagnostics) -> CheckReport {
    let mut report = CheckReport::new("saturation_bounds", BOUND_TOLERANCE, None);
    let v = (-diag.min_saturation).max(diag.max_saturation - 1.0).max(0.0);
    report.record(v, || format!("S in [{:e}, {}]", diag.min_saturation, diag.max_saturation));
    report.samples = diag.steps.len();
    report
}

/// Global wetting-volume balance including well and boundary terms.
pub fn mass_balance(diag: &Diagnostics) -> CheckReport {
    let mut report = CheckReport::new("mass_balance", MASS_TOLERANCE, None);
    report.record(diag.mass_balance_error, || format!("relative imbalance {:e}", diag.mass_balance_error));
    report.samples = diag.steps.len();
    report
}

pub fn bounds_and_mass(diag: &Diagnostics) -> [CheckReport; 2] {
    [saturation_bounds(diag), mass_balance(diag)]
}

/// A 4x4 problem with varying permeability and curved depth, an injector,
/// a producer and either a pressure pin or a fixed-pressure cell.
pub fn reference_problem(scheme: Scheme, dirichlet: bool) -> Problem {
    let g = CartesianGrid::build(
        GridSpec::square(4, 2.0),
        |x, y| 40.0 + 10.0 * x + 5.0 * y * y,
        |_, _| 0.2,
        |x, y| 0.3 * x + y - 0.2 * x * y,
    )
    .expect("valid grid");
    let fluid = FluidModel::new(64.0, 32.0, 1.0, 10.0, 2.0, 3.0, GRAVITY_PSI).expect("valid fluid");
    let mut wells = WellSet {
        injectors: alloc::vec![Injector { cell: 5, rate: 0.3 }],
        producers: alloc::vec![Producer {
            cell: 10,
            bhp: 990.0,
            well_index: 2.0
        }],
        ..Default::default()
    };
    if dirichlet {
        wells.dirichlet = alloc::vec![FixedPressure { cell: 15, pressure: 1001.0 }];
    } else {
        wells.pressure_pin = Some(FixedPressure { cell: 0, pressure: 1000.0 });
    }
    Problem::new(g, fluid, wells, SchemeConfig::new(scheme).with_freeze(false)).expect("valid problem")
}

/// `(state, previous state)` with nonuniform pressure and saturation, for
/// [`reference_problem`].
pub fn reference_states() -> (SimState, SimState) {
    let mut st = SimState::uniform(16, 1000.0, 0.0);
    for i in 0..16 {
        st.p[i] += 0.731 * i as f64 - 0.047 * (i * i) as f64;
        st.s[i] = 0.1 + 0.8 * ((i as f64 * 0.618) % 1.0);
    }
    let mut prev = st.clone();
    prev.s.iter_mut().for_each(|s| *s *= 0.9);
    (st, prev)
}

/// [`fd_assembled_jacobian`] on the reference problem, with both boundary
/// treatments.
pub fn reference_jacobian_checks(scheme: Scheme) -> [CheckReport; 2] {
    let (st, prev) = reference_states();
    [false, true].map(|dirichlet| {
        let mut r = fd_assembled_jacobian(&reference_problem(scheme, dirichlet), &st, &prev, 0.7, 1e-6);
        r.name = format!("{}[{}]", r.name, if dirichlet { "fixed_pressure" } else { "pinned" });
        r
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn assembled_jacobian_matches_differences() {
        for sch in Scheme::ALL {
            for r in reference_jacobian_checks(sch) {
                assert!(r.passed, "{r}");
                assert!(r.samples >= 32 * 32);
            }
        }
    }

    #[test]
    fn no_flow_run_is_exact() {
        let d = Diagnostics {
            min_saturation: 0.0,
            max_saturation: 1.0,
            ..Default::default()
        };
        assert!(bounds_and_mass(&d).iter().all(|r| r.passed));
        let d = Diagnostics {
            min_saturation: -1e-6,
            max_saturation: 1.0,
            ..Default::default()
        };
        assert!(!saturation_bounds(&d).passed);
    }
}
