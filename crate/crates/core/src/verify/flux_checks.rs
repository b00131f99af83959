//! Checks on single interaction regions.

use alloc::format;

use rand::Rng;

use super::sampling::{self, DepthPattern, SampleRng, VelocityCase};
use super::CheckReport;
use crate::fluid::{vertex_chi, FluidModel, MobilitySet};
use crate::flux::mat4::{self, Mat4, Vec4};
use crate::flux::viscous::omega_viscous;
use crate::flux::{buoyancy_flux, region_fluxes, Coupling, FluxError, FluxEvaluation, Limiter, RegionState, Scheme, SchemeConfig};
use crate::grid::InteractionRegion as Ir;
use crate::math;

pub const SIGN_TOLERANCE: f64 = 1e-10;
pub const IDENTITY_TOLERANCE: f64 = 1e-12;
pub const SYMMETRY_TOLERANCE: f64 = 1e-14;
pub const JACOBIAN_TOLERANCE: f64 = 1e-6;
/// Saturation step of the monotonicity difference quotients.
pub const MONOTONICITY_STEP: f64 = 1e-4;

/// Deliberately wrong wetting-flux kernels used as negative controls.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BrokenKernel {
    /// Viscous weights with the sign of `omega` flipped.
    FlippedOmega(Limiter),
    /// Mobility ratio taken from the downstream vertex.
    Downwind,
}

/// Wetting flux `F_w = chi_bar u + G_w` for a prescribed total velocity.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WettingKernel {
    Hybrid(Limiter),
    Broken(BrokenKernel),
}

impl WettingKernel {
    pub fn eval(&self, region: &Ir, u: &Vec4, s: &Vec4, fluid: &FluidModel) -> Result<Vec4, FluxError> {
        let mob = s.map(|x| fluid.mobilities(x));
        let mut chi = [0.0; 4];
        for (c, m) in chi.iter_mut().zip(&mob) {
            *c = vertex_chi(m)?.chi_w;
        }
        let (limiter, xbar) = match *self {
            WettingKernel::Hybrid(l) => (l, Coupling::new(u, l)?.average(&chi)),
            WettingKernel::Broken(BrokenKernel::FlippedOmega(l)) => {
                let omega = core::array::from_fn(|k| -omega_viscous(u, k, l).0);
                (l, Coupling::with_omega(u, omega, [[0.0; 4]; 4])?.average(&chi))
            }
            WettingKernel::Broken(BrokenKernel::Downwind) => {
                let x = core::array::from_fn(|k| if u[k] >= 0.0 { chi[Ir::next(k)] } else { chi[k] });
                (Limiter::Zero, x)
            }
        };
        Ok(core::array::from_fn(|k| {
            xbar[k] * u[k] + buoyancy_flux(&region.half_t, &region.half_dz, k, fluid, &mob, limiter).0
        }))
    }
}

/// Net outflow `F_k - F_{k-1}` of each vertex.
fn net_outflow(f: &Vec4) -> Vec4 {
    core::array::from_fn(|k| f[k] - f[Ir::prev(k)])
}

/// Worst sign violation of the saturation difference quotients of the net
/// outflows, with the vertex and column where it occurs.
fn monotonicity_violation(
    kernel: &WettingKernel,
    region: &Ir,
    u: &Vec4,
    s: &Vec4,
    fluid: &FluidModel,
) -> Result<(f64, usize, usize), FluxError> {
    let mut worst = (0.0, 0, 0);
    for j in 0..4 {
        let (mut lo, mut hi) = (*s, *s);
        lo[j] = (s[j] - MONOTONICITY_STEP).max(0.0);
        hi[j] = (s[j] + MONOTONICITY_STEP).min(1.0);
        let n_lo = net_outflow(&kernel.eval(region, u, &lo, fluid)?);
        let n_hi = net_outflow(&kernel.eval(region, u, &hi, fluid)?);
        for k in 0..4 {
            let d = (n_hi[k] - n_lo[k]) / (hi[j] - lo[j]);
            let v = if j == k { -d } else { d };
            if v > worst.0 {
                worst = (v, k, j);
            }
        }
    }
    Ok(worst)
}

/// Fixed-velocity monotonicity of the hybrid-upwinded flux: for every
/// vertex `k`, `d(F_k - F_{k-1})/dS_j <= 0` for `j != k` and `>= 0` for
/// `j = k`. The non-wetting condition is the same inequality because
/// `F_nw = u - F_w` and `S_nw = 1 - S`.
pub fn monotonicity_scan(limiter: Limiter, samples: usize, seed: u64) -> CheckReport {
    monotonicity_scan_with(&WettingKernel::Hybrid(limiter), samples, seed)
}

pub fn monotonicity_scan_with(kernel: &WettingKernel, samples: usize, seed: u64) -> CheckReport {
    let mut report = CheckReport::new(&format!("monotonicity[{kernel:?}]"), SIGN_TOLERANCE, Some(seed));
    let mut rng = sampling::rng(seed);
    let fluids = sampling::fluids();
    for i in 0..samples {
        let k = i % 4;
        let case = VelocityCase::ALL[(i / 4) % 4];
        let pattern = DepthPattern::ALL[(i / 16) % 4];
        let fluid = &fluids[(i / 64) % fluids.len()];
        let region = sampling::region(&mut rng, pattern);
        let u = sampling::velocities(&mut rng, k, case);
        let s = sampling::saturations(&mut rng);
        let (v, vk, vj) = monotonicity_violation(kernel, &region, &u, &s, fluid).unwrap_or((f64::INFINITY, 0, 0));
        report.record(v, || {
            format!(
                "sample {i}: vertex {vk} column {vj} u={u:?} s={s:?} t={:?} dz={:?}",
                region.half_t, region.half_dz
            )
        });
    }
    report
}

/// Violation of the coupling-matrix properties: strict diagonal dominance
/// of `A`, nonnegative `A^{-1}` and `C`, unit row sums of `C`.
pub fn coupling_violation(c: &Coupling) -> f64 {
    let mut v: f64 = 0.0;
    for i in 0..4 {
        let off: f64 = (0..4).filter(|&j| j != i).map(|j| math::abs(c.a[i][j])).sum();
        let margin = math::abs(c.a[i][i]) - off;
        if margin <= 0.0 {
            v = v.max(-margin).max(f64::MIN_POSITIVE);
        }
        for j in 0..4 {
            v = v.max(-c.a_inv[i][j]).max(-c.c[i][j]);
        }
        v = v.max(math::abs(c.c[i].iter().sum::<f64>() - 1.0));
    }
    v
}

/// Matrix properties for couplings built from random total velocities.
pub fn matrix_properties(limiter: Limiter, samples: usize, seed: u64) -> CheckReport {
    matrix_properties_with(limiter, samples, seed, |u| Coupling::new(u, limiter))
}

/// As [`matrix_properties`] with a custom coupling constructor.
pub fn matrix_properties_with(
    limiter: Limiter,
    samples: usize,
    seed: u64,
    build: impl Fn(&Vec4) -> Result<Coupling, FluxError>,
) -> CheckReport {
    let mut report = CheckReport::new(&format!("matrix_properties[{}]", limiter.name()), IDENTITY_TOLERANCE, Some(seed));
    let mut rng = sampling::rng(seed);
    for i in 0..samples {
        let u = sampling::velocities(&mut rng, i % 4, VelocityCase::ALL[(i / 4) % 4]);
        let v = build(&u).map(|c| coupling_violation(&c)).unwrap_or(f64::INFINITY);
        report.record(v, || format!("sample {i}: u={u:?}"));
    }
    report
}

/// `chi_bar_w u + chi_bar_nw u = u`, each phase averaged independently.
pub fn phase_sum_identity(limiter: Limiter, samples: usize, seed: u64) -> CheckReport {
    let mut report = CheckReport::new(&format!("phase_sum[{}]", limiter.name()), IDENTITY_TOLERANCE, Some(seed));
    let mut rng = sampling::rng(seed);
    let fluids = sampling::fluids();
    for i in 0..samples {
        let fluid = &fluids[i % fluids.len()];
        let u = sampling::velocities(&mut rng, i % 4, VelocityCase::ALL[(i / 4) % 4]);
        let s = sampling::saturations(&mut rng);
        let v = (|| -> Result<f64, FluxError> {
            let cpl = Coupling::new(&u, limiter)?;
            let mut xw = [0.0; 4];
            let mut xnw = [0.0; 4];
            for j in 0..4 {
                let m = fluid.mobilities(s[j]);
                xw[j] = m.lam_w / m.lam_t;
                xnw[j] = m.lam_nw / m.lam_t;
            }
            let (bw, bnw) = (cpl.average(&xw), cpl.average(&xnw));
            Ok((0..4).map(|k| math::abs(bw[k] * u[k] + bnw[k] * u[k] - u[k])).fold(0.0, f64::max))
        })()
        .unwrap_or(f64::INFINITY);
        report.record(v, || format!("sample {i}: u={u:?} s={s:?}"));
    }
    report
}

fn swap_phases(f: &FluidModel) -> FluidModel {
    FluidModel {
        rho_w: f.rho_nw,
        rho_nw: f.rho_w,
        mu_w: f.mu_nw,
        mu_nw: f.mu_w,
        w_exponent: f.nw_exponent,
        nw_exponent: f.w_exponent,
        g: f.g,
    }
}

fn swap_mobility(m: &MobilitySet) -> MobilitySet {
    MobilitySet {
        lam_w: m.lam_nw,
        lam_nw: m.lam_w,
        lam_t: m.lam_t,
        dlam_w_ds: -m.dlam_nw_ds,
        dlam_nw_ds: -m.dlam_w_ds,
        dlam_t_ds: -m.dlam_t_ds,
    }
}

/// `G_w + G_nw = 0`, with `G_nw` evaluated as the leading phase of the
/// fluid with the roles of the phases exchanged.
pub fn buoyancy_antisymmetry(limiter: Limiter, samples: usize, seed: u64) -> CheckReport {
    let mut report = CheckReport::new(&format!("buoyancy_antisymmetry[{}]", limiter.name()), IDENTITY_TOLERANCE, Some(seed));
    let mut rng = sampling::rng(seed);
    let fluids = sampling::fluids();
    for i in 0..samples {
        let fluid = &fluids[i % fluids.len()];
        let region = sampling::region(&mut rng, DepthPattern::ALL[(i / 4) % 4]);
        let s = sampling::saturations(&mut rng);
        let mob = s.map(|x| fluid.mobilities(x));
        let swapped = swap_phases(fluid);
        let mob_nw = mob.map(|m| swap_mobility(&m));
        let v = (0..4)
            .map(|k| {
                let gw = buoyancy_flux(&region.half_t, &region.half_dz, k, fluid, &mob, limiter).0;
                let gnw = buoyancy_flux(&region.half_t, &region.half_dz, k, &swapped, &mob_nw, limiter).0;
                math::abs(gw + gnw)
            })
            .fold(0.0, f64::max);
        report.record(v, || format!("sample {i}: s={s:?} t={:?} dz={:?}", region.half_t, region.half_dz));
    }
    report
}

/// `phi(1/r) = phi(r) / r` for the fourth-order smooth limiter.
pub fn smu4_symmetry(samples: usize, seed: u64) -> CheckReport {
    let mut report = CheckReport::new("smu4_symmetry", SYMMETRY_TOLERANCE, Some(seed));
    let mut rng = sampling::rng(seed);
    for i in 0..samples {
        let r = if i == 0 {
            1.0
        } else {
            libm::exp(rng.gen_range(-12.0..12.0))
        };
        let v = math::abs(Limiter::Smu4.value(1.0 / r) - Limiter::Smu4.value(r) / r);
        report.record(v, || format!("r={r:e}"));
    }
    report
}

fn random_state(rng: &mut SampleRng, interior: bool) -> RegionState {
    RegionState {
        p: core::array::from_fn(|_| 1000.0 + rng.gen_range(-1.0..1.0)),
        s: if interior {
            core::array::from_fn(|_| rng.gen_range(0.05..0.95))
        } else {
            sampling::saturations(rng)
        },
    }
}

fn max_abs(e: &FluxEvaluation) -> f64 {
    e.f_w.iter().chain(&e.f_nw).chain(&e.u_t).fold(0.0, |m, v| m.max(math::abs(*v)))
}

/// MultiD-IHU with the zero limiter against the two-point hybrid scheme.
pub fn scheme_identity(samples: usize, seed: u64) -> CheckReport {
    let mut report = CheckReport::new("multid_zero_equals_two_point", SYMMETRY_TOLERANCE, Some(seed));
    let mut rng = sampling::rng(seed);
    let fluids = sampling::fluids();
    let multid = SchemeConfig::new(Scheme::MultiDIhu).with_limiter(Limiter::Zero);
    let two_point = SchemeConfig::new(Scheme::Ihu1d);
    for i in 0..samples {
        let fluid = &fluids[i % fluids.len()];
        let region = sampling::region(&mut rng, DepthPattern::ALL[(i / 4) % 4]);
        let st = random_state(&mut rng, false);
        let v = match (
            region_fluxes(&multid, &region, &st, fluid),
            region_fluxes(&two_point, &region, &st, fluid),
        ) {
            (Ok(a), Ok(b)) => {
                let scale = max_abs(&b).max(1.0);
                (0..4)
                    .map(|k| {
                        let d = math::abs(a.f_w[k] - b.f_w[k])
                            .max(math::abs(a.f_nw[k] - b.f_nw[k]))
                            .max(math::abs(a.u_t[k] - b.u_t[k]));
                        d / scale
                    })
                    .fold(0.0, f64::max)
            }
            _ => f64::INFINITY,
        };
        report.record(v, || format!("sample {i}: {st:?}"));
    }
    report
}

/// Smallest distance to a switch of any upwind direction, measured in
/// multiples of a perturbation of size `step`.
fn kink_margin(cfg: &SchemeConfig, region: &Ir, st: &RegionState, fluid: &FluidModel, e: &FluxEvaluation, step: f64) -> f64 {
    let mut margin = f64::INFINITY;
    for k in 0..4 {
        let k1 = Ir::next(k);
        let dp = st.p[k] - st.p[k1];
        let dz = region.half_dz[k];
        if !cfg.scheme.is_ihu() {
            for gamma in [fluid.gamma_w(), fluid.gamma_nw()] {
                margin = margin.min(math::abs(dp + gamma * dz) / step);
            }
        }
        let sens = e.du_t[k].iter().fold(0.0f64, |m, v| m.max(math::abs(*v)));
        if sens > 0.0 {
            margin = margin.min(math::abs(e.u_t[k]) / (sens * step));
        }
    }
    margin
}

/// Central-difference check of the analytic region partials. States within
/// ten steps of an upwind switch are reported as skipped.
pub fn fd_flux_jacobian(cfg: &SchemeConfig, region: &Ir, st: &RegionState, fluid: &FluidModel, step: f64) -> CheckReport {
    let mut report = CheckReport::new(&format!("fd_flux_jacobian[{}]", cfg.scheme.name()), JACOBIAN_TOLERANCE, None);
    fd_flux_jacobian_into(&mut report, cfg, region, st, fluid, step, "");
    report
}

fn fd_flux_jacobian_into(
    report: &mut CheckReport,
    cfg: &SchemeConfig,
    region: &Ir,
    st: &RegionState,
    fluid: &FluidModel,
    step: f64,
    label: &str,
) {
    let base = match region_fluxes(cfg, region, st, fluid) {
        Ok(e) => e,
        Err(_) => {
            report.record(f64::INFINITY, || format!("{label} evaluation failed at {st:?}"));
            return;
        }
    };
    if kink_margin(cfg, region, st, fluid, &base, step) <= 10.0 {
        report.skip();
        return;
    }
    let noise = 8.0 * f64::EPSILON * max_abs(&base).max(1.0) / step;
    let mut worst = (0.0, 0, 0, "");
    for col in 0..8 {
        let (mut lo, mut hi) = (*st, *st);
        if col < 4 {
            lo.p[col] -= step;
            hi.p[col] += step;
        } else {
            lo.s[col - 4] -= step;
            hi.s[col - 4] += step;
        }
        let (a, b) = match (region_fluxes(cfg, region, &lo, fluid), region_fluxes(cfg, region, &hi, fluid)) {
            (Ok(a), Ok(b)) => (a, b),
            _ => {
                report.record(f64::INFINITY, || format!("{label} perturbed evaluation failed at {st:?}"));
                return;
            }
        };
        let quantities: [(&str, &Vec4, &Vec4, &[[f64; 8]; 4]); 3] = [
            ("f_w", &a.f_w, &b.f_w, &base.df_w),
            ("f_nw", &a.f_nw, &b.f_nw, &base.df_nw),
            ("u_t", &a.u_t, &b.u_t, &base.du_t),
        ];
        for (name, fa, fb, an) in quantities {
            for k in 0..4 {
                let fd = (fb[k] - fa[k]) / (2.0 * step);
                let an = an[k][col];
                let scale = math::abs(fd).max(math::abs(an)).max(noise / JACOBIAN_TOLERANCE);
                let rel = math::abs(fd - an) / scale;
                if rel > worst.0 {
                    worst = (rel, k, col, name);
                }
            }
        }
    }
    let (v, k, col, name) = worst;
    report.record(v, || format!("{label} {name}[{k}] column {col} at {st:?}"));
}

/// Finite-difference check of the region partials on random states and
/// regions.
pub fn fd_flux_jacobian_scan(cfg: &SchemeConfig, samples: usize, seed: u64, step: f64) -> CheckReport {
    let mut report = CheckReport::new(&format!("fd_flux_jacobian[{}]", cfg.scheme.name()), JACOBIAN_TOLERANCE, Some(seed));
    let mut rng = sampling::rng(seed);
    let fluids = sampling::fluids();
    for i in 0..samples {
        let fluid = &fluids[i % fluids.len()];
        let region = sampling::region(&mut rng, DepthPattern::ALL[(i / 4) % 4]);
        let st = random_state(&mut rng, true);
        fd_flux_jacobian_into(&mut report, cfg, &region, &st, fluid, step, &format!("sample {i}"));
    }
    report
}

/// `A` with every weight forced to `omega`.
pub fn forced_coupling(u: &Vec4, omega: f64) -> Result<Coupling, FluxError> {
    Coupling::with_omega(u, [omega; 4], [[0.0; 4]; 4])
}

#[allow(dead_code)]
fn identity_distance(a: &Mat4) -> f64 {
    let mut d: f64 = 0.0;
    for i in 0..4 {
        for j in 0..4 {
            d = d.max(math::abs(a[i][j] - mat4::IDENTITY[i][j]));
        }
    }
    d
}
