//! Scheme dispatch over one interaction region.

use super::buoyancy::{buoyancy_flux, harmonic};
use super::limiter::Limiter;
use super::mat4::Vec4;
use super::total_velocity::{gamma_bar, ppu_flux, total_velocity, GammaConfig};
use super::viscous::{chi_derivatives, Coupling};
use super::{FluxError, Scheme, SchemeConfig};
use crate::fluid::{vertex_chi, FluidModel, MobilitySet};
use crate::grid::InteractionRegion as Ir;

/// Partials of four half-interface quantities w.r.t. the region unknowns
/// `(p_0..p_3, S_0..S_3)`.
pub type Partials = [[f64; 8]; 4];

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct RegionState {
    pub p: Vec4,
    pub s: Vec4,
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct FluxEvaluation {
    pub f_w: Vec4,
    pub f_nw: Vec4,
    pub u_t: Vec4,
    pub df_w: Partials,
    pub df_nw: Partials,
    pub du_t: Partials,
}

impl FluxEvaluation {
    fn from_wetting(f_w: Vec4, df_w: Partials, u_t: Vec4, du_t: Partials) -> Self {
        let mut f_nw = [0.0; 4];
        let mut df_nw = [[0.0; 8]; 4];
        for k in 0..4 {
            f_nw[k] = u_t[k] - f_w[k];
            for c in 0..8 {
                df_nw[k][c] = du_t[k][c] - df_w[k][c];
            }
        }
        Self {
            f_w,
            f_nw,
            u_t,
            df_w,
            df_nw,
            du_t,
        }
    }

    fn from_phases(f_w: Vec4, df_w: Partials, f_nw: Vec4, df_nw: Partials) -> Self {
        let mut u_t = [0.0; 4];
        let mut du_t = [[0.0; 8]; 4];
        for k in 0..4 {
            u_t[k] = f_w[k] + f_nw[k];
            for c in 0..8 {
                du_t[k][c] = df_w[k][c] + df_nw[k][c];
            }
        }
        Self {
            f_w,
            f_nw,
            u_t,
            df_w,
            df_nw,
            du_t,
        }
    }
}

/// Evaluates the four half-interface fluxes of `region` under `cfg`.
pub fn region_fluxes(
    cfg: &SchemeConfig,
    region: &Ir,
    state: &RegionState,
    fluid: &FluidModel,
) -> Result<FluxEvaluation, FluxError> {
    let mob = state.s.map(|s| fluid.mobilities(s));
    match cfg.scheme {
        Scheme::Ppu1d => Ok(ppu_two_point(region, state, &mob, fluid)),
        Scheme::Ihu1d => ihu_two_point(region, state, &mob, fluid, &cfg.gamma),
        Scheme::MultiDPpu => ppu_multid(region, state, &mob, fluid, cfg.limiter, cfg.freeze_omega),
        Scheme::MultiDIhu => ihu_multid(region, state, &mob, fluid, cfg.limiter, cfg.freeze_omega, &cfg.gamma),
    }
}

/// Total velocities at the four half interfaces with their partials.
pub fn total_velocities(
    region: &Ir,
    state: &RegionState,
    mob: &[MobilitySet; 4],
    fluid: &FluidModel,
    gamma: &GammaConfig,
) -> (Vec4, Partials) {
    let mut u = [0.0; 4];
    let mut du = [[0.0; 8]; 4];
    for k in 0..4 {
        let k1 = Ir::next(k);
        let dz = region.half_dz[k];
        let g = gamma_bar(dz, region.dist[k], fluid, gamma);
        let v = total_velocity(
            region.half_t[k],
            state.p[k] - state.p[k1],
            dz,
            &mob[k],
            &mob[k1],
            fluid,
            g,
        );
        u[k] = v.u;
        du[k][k] += v.du_ddp;
        du[k][k1] -= v.du_ddp;
        du[k][4 + k] += v.du_dsk;
        du[k][4 + k1] += v.du_dsk1;
    }
    (u, du)
}

fn chi_vectors(mob: &[MobilitySet; 4]) -> Result<(Vec4, Vec4), FluxError> {
    let mut x = [0.0; 4];
    let mut dx = [0.0; 4];
    for j in 0..4 {
        let c = vertex_chi(&mob[j])?;
        x[j] = c.chi_w;
        dx[j] = c.dchi_w_ds;
    }
    Ok((x, dx))
}

fn ihu_multid(
    region: &Ir,
    state: &RegionState,
    mob: &[MobilitySet; 4],
    fluid: &FluidModel,
    limiter: Limiter,
    freeze: bool,
    gamma: &GammaConfig,
) -> Result<FluxEvaluation, FluxError> {
    let (u, du) = total_velocities(region, state, mob, fluid, gamma);
    let (x, dx) = chi_vectors(mob)?;
    let cpl = Coupling::new(&u, limiter)?;
    let xbar = cpl.average(&x);
    let dxbar = chi_derivatives(&cpl, &xbar, &x, &dx, &du, freeze);
    let mut f = [0.0; 4];
    let mut df = [[0.0; 8]; 4];
    for k in 0..4 {
        f[k] = xbar[k] * u[k];
        for c in 0..8 {
            df[k][c] = xbar[k] * du[k][c] + u[k] * dxbar[k][c];
        }
        let (g, dg) = buoyancy_flux(&region.half_t, &region.half_dz, k, fluid, mob, limiter);
        f[k] += g;
        for j in 0..4 {
            df[k][4 + j] += dg[j];
        }
    }
    Ok(FluxEvaluation::from_wetting(f, df, u, du))
}

fn ihu_two_point(
    region: &Ir,
    state: &RegionState,
    mob: &[MobilitySet; 4],
    fluid: &FluidModel,
    gamma: &GammaConfig,
) -> Result<FluxEvaluation, FluxError> {
    let (u, du) = total_velocities(region, state, mob, fluid, gamma);
    let (x, dx) = chi_vectors(mob)?;
    let drho_g = (fluid.rho_w - fluid.rho_nw) * fluid.g;
    let mut f = [0.0; 4];
    let mut df = [[0.0; 8]; 4];
    for k in 0..4 {
        let k1 = Ir::next(k);
        let up = if u[k] >= 0.0 { k } else { k1 };
        f[k] = x[up] * u[k];
        for c in 0..8 {
            df[k][c] = x[up] * du[k][c];
        }
        df[k][4 + up] += u[k] * dx[up];

        let (t, dz) = (region.half_t[k], region.half_dz[k]);
        if dz == 0.0 || drho_g == 0.0 || t == 0.0 {
            continue;
        }
        let scale = t * drho_g * dz;
        // heavier phase leaves vertex k when k + 1 is deeper
        if drho_g * dz > 0.0 {
            let (h, dw, dnw) = harmonic(mob[k].lam_w, mob[k1].lam_nw);
            f[k] += scale * h;
            df[k][4 + k] += scale * dw * mob[k].dlam_w_ds;
            df[k][4 + k1] += scale * dnw * mob[k1].dlam_nw_ds;
        } else {
            let (h, dnw, dw) = harmonic(mob[k].lam_nw, mob[k1].lam_w);
            f[k] += scale * h;
            df[k][4 + k] += scale * dnw * mob[k].dlam_nw_ds;
            df[k][4 + k1] += scale * dw * mob[k1].dlam_w_ds;
        }
    }
    Ok(FluxEvaluation::from_wetting(f, df, u, du))
}

fn ppu_two_point(region: &Ir, state: &RegionState, mob: &[MobilitySet; 4], fluid: &FluidModel) -> FluxEvaluation {
    let mut fw = [0.0; 4];
    let mut fnw = [0.0; 4];
    let mut dfw = [[0.0; 8]; 4];
    let mut dfnw = [[0.0; 8]; 4];
    for k in 0..4 {
        let k1 = Ir::next(k);
        let [w, nw] = ppu_flux(
            region.half_t[k],
            state.p[k] - state.p[k1],
            region.half_dz[k],
            &mob[k],
            &mob[k1],
            fluid,
        );
        for (f, d, pf) in [(&mut fw, &mut dfw, w), (&mut fnw, &mut dfnw, nw)] {
            f[k] = pf.f;
            d[k][k] = pf.df_ddp;
            d[k][k1] = -pf.df_ddp;
            d[k][4 + k] = pf.df_dsk;
            d[k][4 + k1] = pf.df_dsk1;
        }
    }
    FluxEvaluation::from_phases(fw, dfw, fnw, dfnw)
}

/// Multi-D phase-potential upwinding: per phase, the mobility-free flux
/// `w_k = T_k (dp_k + rho g dz_k)` drives the same coupling system that
/// averages the vertex mobilities.
fn ppu_multid(
    region: &Ir,
    state: &RegionState,
    mob: &[MobilitySet; 4],
    fluid: &FluidModel,
    limiter: Limiter,
    freeze: bool,
) -> Result<FluxEvaluation, FluxError> {
    let mut out = [([0.0; 4], [[0.0; 8]; 4]); 2];
    let phases = [
        (fluid.gamma_w(), mob.map(|m| m.lam_w), mob.map(|m| m.dlam_w_ds)),
        (fluid.gamma_nw(), mob.map(|m| m.lam_nw), mob.map(|m| m.dlam_nw_ds)),
    ];
    for (slot, (gam, lam, dlam)) in out.iter_mut().zip(phases) {
        let mut w = [0.0; 4];
        let mut dw = [[0.0; 8]; 4];
        for k in 0..4 {
            let k1 = Ir::next(k);
            let t = region.half_t[k];
            w[k] = t * (state.p[k] - state.p[k1] + gam * region.half_dz[k]);
            dw[k][k] = t;
            dw[k][k1] = -t;
        }
        let cpl = Coupling::new(&w, limiter)?;
        let lbar = cpl.average(&lam);
        let dlbar = chi_derivatives(&cpl, &lbar, &lam, &dlam, &dw, freeze);
        for k in 0..4 {
            slot.0[k] = lbar[k] * w[k];
            for c in 0..8 {
                slot.1[k][c] = lbar[k] * dw[k][c] + w[k] * dlbar[k][c];
            }
        }
    }
    let [(fw, dfw), (fnw, dfnw)] = out;
    Ok(FluxEvaluation::from_phases(fw, dfw, fnw, dfnw))
}

/// Wetting flux split into its viscous and buoyancy parts for a prescribed
/// total velocity field. Used by the monotonicity checks.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FixedVelocityFlux {
    pub viscous: Vec4,
    pub buoyancy: Vec4,
}

impl FixedVelocityFlux {
    pub fn total(&self) -> Vec4 {
        core::array::from_fn(|k| self.viscous[k] + self.buoyancy[k])
    }
}

pub fn fixed_velocity_wetting_flux(
    region: &Ir,
    u: &Vec4,
    s: &Vec4,
    fluid: &FluidModel,
    limiter: Limiter,
) -> Result<FixedVelocityFlux, FluxError> {
    let mob = s.map(|x| fluid.mobilities(x));
    let (x, _) = chi_vectors(&mob)?;
    let cpl = Coupling::new(u, limiter)?;
    let xbar = cpl.average(&x);
    let mut viscous = [0.0; 4];
    let mut buoyancy = [0.0; 4];
    for k in 0..4 {
        viscous[k] = xbar[k] * u[k];
        buoyancy[k] = buoyancy_flux(&region.half_t, &region.half_dz, k, fluid, &mob, limiter).0;
    }
    Ok(FixedVelocityFlux { viscous, buoyancy })
}
