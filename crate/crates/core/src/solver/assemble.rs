//! Residual and Jacobian assembly.
//!
//! Per cell, with `c = dt / (phi V)`:
//!
//! ```text
//! R_p = c (sum_out u_T - q_T)
//! R_w = (S - S^n) + c (sum_out F_w - q_w)
//! ```
//!
//! The outflow sums run over the eight half interfaces of the cell, two in
//! each of the four interaction regions it belongs to.

use alloc::vec::Vec;

use super::jacobian::Jacobian;
use super::{CellRole, Problem, SimState, SolverError};
use crate::fluid::vertex_chi;
use crate::flux::{region_fluxes, FluxError, RegionState};
use crate::grid::InteractionRegion as Ir;

/// Workspace and result of one assembly.
#[derive(Debug, Clone)]
pub struct Assembly {
    /// Interleaved `(R_p, R_w)` per cell.
    pub residual: Vec<f64>,
    pub jacobian: Jacobian,
    /// Non-wetting balance per cell, used only for the convergence test.
    pub residual_nw: Vec<f64>,
    /// Phase sources per cell [ft^3/day], positive into the cell.
    pub q_w: Vec<f64>,
    pub q_nw: Vec<f64>,
    /// `max_i max(|R_w,i|, |R_nw,i|)`, plus `|p - p_fixed|` on fixed cells.
    pub norm: f64,
    out_w: Vec<f64>,
    out_nw: Vec<f64>,
    out_t: Vec<f64>,
}

/// Well and boundary rates at one state [ft^3/day].
#[derive(Debug, Clone, PartialEq, Default)]
pub struct PhaseRates {
    pub injected_w: f64,
    /// `(q_w, q_nw)` produced by each producer, positive outward.
    pub produced: Vec<(f64, f64)>,
    /// Net `(q_w, q_nw)` entering through fixed-pressure cells.
    pub boundary_in: (f64, f64),
}

impl PhaseRates {
    /// Net wetting rate into the domain.
    pub fn net_wetting(&self) -> f64 {
        self.injected_w - self.produced.iter().map(|q| q.0).sum::<f64>() + self.boundary_in.0
    }
}

impl Assembly {
    pub fn new(problem: &Problem) -> Self {
        let n = problem.num_cells();
        Self {
            residual: alloc::vec![0.0; 2 * n],
            jacobian: Jacobian::zeros(problem.pattern.clone()),
            residual_nw: alloc::vec![0.0; n],
            q_w: alloc::vec![0.0; n],
            q_nw: alloc::vec![0.0; n],
            norm: 0.0,
            out_w: alloc::vec![0.0; n],
            out_nw: alloc::vec![0.0; n],
            out_t: alloc::vec![0.0; n],
        }
    }

    pub fn rates(&self, problem: &Problem) -> PhaseRates {
        let produced = problem
            .wells
            .producers
            .iter()
            .map(|w| (-self.q_w[w.cell], -self.q_nw[w.cell]))
            .collect();
        let boundary_in = problem
            .wells
            .dirichlet
            .iter()
            .fold((0.0, 0.0), |acc, d| (acc.0 + self.q_w[d.cell], acc.1 + self.q_nw[d.cell]));
        PhaseRates {
            injected_w: problem.wells.injectors.iter().map(|w| w.rate).sum(),
            produced,
            boundary_in,
        }
    }
}

fn check_len(expected: usize, got: usize) -> Result<(), SolverError> {
    if expected == got {
        Ok(())
    } else {
        Err(SolverError::DimensionMismatch { expected, got })
    }
}

/// Assembles the residual and Jacobian of the step `prev -> state` over `dt`.
pub fn assemble(
    problem: &Problem,
    state: &SimState,
    prev: &SimState,
    dt: f64,
    out: &mut Assembly,
) -> Result<(), SolverError> {
    let n = problem.num_cells();
    for len in [state.p.len(), state.s.len(), prev.s.len()] {
        check_len(n, len)?;
    }
    check_len(2 * n, out.residual.len())?;
    let fluid = &problem.fluid;
    let grid = &problem.grid;
    out.jacobian.clear();
    for v in [&mut out.out_w, &mut out.out_nw, &mut out.out_t, &mut out.q_w, &mut out.q_nw] {
        v.iter_mut().for_each(|x| *x = 0.0);
    }

    // Dirichlet cells need their own wetting mobility ratio up front.
    let chi_w: Vec<f64> = problem
        .roles
        .iter()
        .enumerate()
        .map(|(i, role)| match role {
            CellRole::Dirichlet(_) => vertex_chi(&fluid.mobilities(state.s[i])).map(|c| c.chi_w),
            _ => Ok(0.0),
        })
        .collect::<Result<_, _>>()
        .map_err(FluxError::from)?;

    for (r, reg) in problem.dual.regions.iter().enumerate() {
        let cells = reg.vertex_cells;
        let st = RegionState {
            p: cells.map(|c| state.p[c]),
            s: cells.map(|c| state.s[c]),
        };
        let e = region_fluxes(&problem.scheme, reg, &st, fluid)?;
        let slots = &problem.region_slots[r];
        for a in 0..4 {
            let pa = Ir::prev(a);
            let ca = cells[a];
            out.out_w[ca] += e.f_w[a] - e.f_w[pa];
            out.out_nw[ca] += e.f_nw[a] - e.f_nw[pa];
            out.out_t[ca] += e.u_t[a] - e.u_t[pa];
            let c = dt / grid.pore_volume(ca);
            let role = problem.roles[ca];
            for b in 0..4 {
                let blk = &mut out.jacobian.blocks[slots[a][b]];
                for (col, unk) in [(b, 0), (4 + b, 1)] {
                    let dtot = e.du_t[a][col] - e.du_t[pa][col];
                    let dw = e.df_w[a][col] - e.df_w[pa][col];
                    match role {
                        CellRole::Interior => {
                            blk[0][unk] += c * dtot;
                            blk[1][unk] += c * dw;
                        }
                        CellRole::Pinned(_) => blk[1][unk] += c * dw,
                        CellRole::Dirichlet(_) => blk[1][unk] += c * (dw - chi_w[ca] * dtot),
                    }
                }
            }
        }
    }

    for w in &problem.wells.injectors {
        out.q_w[w.cell] += w.rate;
    }
    for w in &problem.wells.producers {
        let i = w.cell;
        let dp = state.p[i] - w.bhp;
        // the outflow-side derivative at dp = 0 keeps the pressure anchored
        if dp < 0.0 {
            continue;
        }
        let m = fluid.mobilities(state.s[i]);
        out.q_w[i] -= w.well_index * m.lam_w * dp;
        out.q_nw[i] -= w.well_index * m.lam_nw * dp;
        let c = dt / grid.pore_volume(i);
        let blk = &mut out.jacobian.blocks[problem.diag_slots[i]];
        if matches!(problem.roles[i], CellRole::Interior) {
            blk[0][0] += c * w.well_index * m.lam_t;
            blk[0][1] += c * w.well_index * m.dlam_t_ds * dp;
        }
        blk[1][0] += c * w.well_index * m.lam_w;
        blk[1][1] += c * w.well_index * m.dlam_w_ds * dp;
    }

    let mut norm: f64 = 0.0;
    for i in 0..n {
        let c = dt / grid.pore_volume(i);
        let ds = state.s[i] - prev.s[i];
        let diag = problem.diag_slots[i];
        out.jacobian.blocks[diag][1][1] += 1.0;
        match problem.roles[i] {
            CellRole::Interior => {
                out.residual[2 * i] = c * (out.out_t[i] - out.q_w[i] - out.q_nw[i]);
            }
            CellRole::Pinned(p0) => {
                out.residual[2 * i] = state.p[i] - p0;
                out.jacobian.blocks[diag][0] = [1.0, 0.0];
                norm = norm.max(crate::math::abs(out.residual[2 * i]));
            }
            CellRole::Dirichlet(p0) => {
                out.residual[2 * i] = state.p[i] - p0;
                out.jacobian.blocks[diag][0] = [1.0, 0.0];
                norm = norm.max(crate::math::abs(out.residual[2 * i]));
                let m = fluid.mobilities(state.s[i]);
                let vc = vertex_chi(&m).map_err(FluxError::from)?;
                out.q_w[i] += vc.chi_w * out.out_t[i];
                out.q_nw[i] += vc.chi_nw * out.out_t[i];
                out.jacobian.blocks[diag][1][1] -= c * vc.dchi_w_ds * out.out_t[i];
            }
        }
        let rw = ds + c * (out.out_w[i] - out.q_w[i]);
        let rnw = -ds + c * (out.out_nw[i] - out.q_nw[i]);
        out.residual[2 * i + 1] = rw;
        out.residual_nw[i] = rnw;
        norm = norm.max(crate::math::abs(rw)).max(crate::math::abs(rnw));
    }
    out.norm = norm;
    Ok(())
}
