//! Buoyancy part of the hybrid-upwinded flux.
//!
//! The heavy phase moves toward the deeper vertex and the light phase the
//! other way, so each phase mobility is taken upstream with respect to its
//! own buoyant motion. The multidimensional variant blends in the third
//! vertex of the region when consecutive half interfaces are inclined the
//! same way; the blend weight is purely geometric.

use super::limiter::Limiter;
use super::mat4::Vec4;
use crate::fluid::{FluidModel, MobilitySet};
use crate::grid::InteractionRegion as Ir;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GravityBranch {
    /// `dz_k * dz_{k+1} > 0`: blend with vertex `k + 2`.
    Next,
    /// `dz_k * dz_{k-1} > 0`: blend with vertex `k - 1`.
    Prev,
    None,
}

/// Geometric buoyancy weight `omega^G_k`.
pub fn omega_gravity(t: &Vec4, dz: &Vec4, k: usize, limiter: Limiter) -> (f64, GravityBranch) {
    let (n, p) = (Ir::next(k), Ir::prev(k));
    let own = t[k] * dz[k];
    if dz[k] * dz[n] > 0.0 {
        (limiter.value(t[n] * dz[n] / own), GravityBranch::Next)
    } else if dz[k] * dz[p] > 0.0 {
        (limiter.value(t[p] * dz[p] / own), GravityBranch::Prev)
    } else {
        (0.0, GravityBranch::None)
    }
}

/// `a b / (a + b)` with partials; zero when both arguments vanish.
#[inline]
pub fn harmonic(a: f64, b: f64) -> (f64, f64, f64) {
    let s = a + b;
    if s <= 0.0 {
        return (0.0, 0.0, 0.0);
    }
    let inv = 1.0 / (s * s);
    (a * b / s, b * b * inv, a * a * inv)
}

/// Interfacial buoyancy mobility at half interface `k`.
///
/// `lead` holds the vertex mobilities of the phase moving from `k` to
/// `k + 1` under buoyancy, `other` those of the opposite phase. Returns the
/// value and its partials with respect to `lead[j]` and `other[j]`.
pub fn buoyancy_psi(
    k: usize,
    lead: &Vec4,
    other: &Vec4,
    omega: f64,
    branch: GravityBranch,
) -> (f64, Vec4, Vec4) {
    let k1 = Ir::next(k);
    let mut dl = [0.0; 4];
    let mut dot = [0.0; 4];
    let (h0, ha, hb) = harmonic(lead[k], other[k1]);
    let w0 = match branch {
        GravityBranch::None => 1.0,
        _ => 1.0 - omega,
    };
    let mut val = w0 * h0;
    dl[k] += w0 * ha;
    dot[k1] += w0 * hb;
    let (il, io) = match branch {
        GravityBranch::Next => (k, Ir::next(k1)),
        GravityBranch::Prev => (Ir::prev(k), k1),
        GravityBranch::None => return (val, dl, dot),
    };
    let (h1, ha1, hb1) = harmonic(lead[il], other[io]);
    val += omega * h1;
    dl[il] += omega * ha1;
    dot[io] += omega * hb1;
    (val, dl, dot)
}

/// Wetting-phase buoyancy flux `G_w` at half interface `k` and its partials
/// w.r.t. the four vertex saturations. `G_nw = -G_w`.
pub fn buoyancy_flux(
    t: &Vec4,
    dz: &Vec4,
    k: usize,
    fluid: &FluidModel,
    mob: &[MobilitySet; 4],
    limiter: Limiter,
) -> (f64, Vec4) {
    let drho_g = (fluid.rho_w - fluid.rho_nw) * fluid.g;
    let mut d = [0.0; 4];
    if dz[k] == 0.0 || drho_g == 0.0 || t[k] == 0.0 {
        return (0.0, d);
    }
    let (omega, branch) = omega_gravity(t, dz, k, limiter);
    let lw = [mob[0].lam_w, mob[1].lam_w, mob[2].lam_w, mob[3].lam_w];
    let lnw = [mob[0].lam_nw, mob[1].lam_nw, mob[2].lam_nw, mob[3].lam_nw];
    let scale = t[k] * drho_g * dz[k];
    let wetting_leads = drho_g * dz[k] > 0.0;
    let (psi, dlead, dother) = if wetting_leads {
        buoyancy_psi(k, &lw, &lnw, omega, branch)
    } else {
        buoyancy_psi(k, &lnw, &lw, omega, branch)
    };
    for j in 0..4 {
        let (dw, dnw) = if wetting_leads {
            (dlead[j], dother[j])
        } else {
            (dother[j], dlead[j])
        };
        d[j] = scale * (dw * mob[j].dlam_w_ds + dnw * mob[j].dlam_nw_ds);
    }
    (scale * psi, d)
}
