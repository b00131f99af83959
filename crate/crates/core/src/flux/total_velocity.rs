//! Two-point total velocity with smoothly weighted-average mobilities,
//! and the standard single-point phase-potential upwind flux.

use core::f64::consts::PI;

use crate::fluid::{FluidModel, MobilitySet};
use crate::math;

/// Controls the steepness `gamma_bar` of the upstream blending weight
/// `beta = 1/2 + atan(gamma_bar * dPhi) / pi`.
///
/// `gamma_bar = scale / (g |drho| |dz| + flat * g |drho| d)`, where `d` is
/// the center-to-center distance. The second term keeps `beta` smooth on
/// half interfaces with no depth difference.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(default, deny_unknown_fields))]
pub struct GammaConfig {
    pub scale: f64,
    pub flat: f64,
}

impl Default for GammaConfig {
    fn default() -> Self {
        Self {
            scale: 1.0,
            flat: 1.0,
        }
    }
}

pub fn gamma_bar(dz: f64, dist: f64, fluid: &FluidModel, cfg: &GammaConfig) -> f64 {
    let buoy = fluid.g * math::abs(fluid.rho_w - fluid.rho_nw);
    let den = buoy * (math::abs(dz) + cfg.flat * dist);
    if den > 0.0 {
        cfg.scale / den
    } else {
        f64::INFINITY
    }
}

/// `(beta, d beta / d dPhi)`.
pub fn upstream_weight(gamma: f64, dphi: f64) -> (f64, f64) {
    if !gamma.is_finite() {
        let b = if dphi > 0.0 {
            1.0
        } else if dphi < 0.0 {
            0.0
        } else {
            0.5
        };
        return (b, 0.0);
    }
    let x = gamma * dphi;
    (0.5 + math::atan(x) / PI, gamma / (PI * (1.0 + x * x)))
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct InterfaceVelocity {
    pub u: f64,
    /// `du / d(p_k - p_{k+1})`.
    pub du_ddp: f64,
    pub du_dsk: f64,
    pub du_dsk1: f64,
    pub beta: f64,
}

/// `u_T = T lam_T^WA dp + T sum_l lam_l^WA rho_l g dz` with
/// `lam_l^WA = beta lam_l(S_k) + (1 - beta) lam_l(S_{k+1})`.
pub fn total_velocity(
    t: f64,
    dp: f64,
    dz: f64,
    mk: &MobilitySet,
    mk1: &MobilitySet,
    fluid: &FluidModel,
    gamma: f64,
) -> InterfaceVelocity {
    let (gw, gnw) = (fluid.gamma_w(), fluid.gamma_nw());
    let dphi = dp + 0.5 * (gw + gnw) * dz;
    let (beta, dbeta) = upstream_weight(gamma, dphi);
    let pw = dp + gw * dz;
    let pnw = dp + gnw * dz;
    let lw = beta * mk.lam_w + (1.0 - beta) * mk1.lam_w;
    let lnw = beta * mk.lam_nw + (1.0 - beta) * mk1.lam_nw;
    let u = t * (lw * pw + lnw * pnw);
    let du_ddp = t * (lw + lnw + dbeta * ((mk.lam_w - mk1.lam_w) * pw + (mk.lam_nw - mk1.lam_nw) * pnw));
    let du_dsk = t * beta * (mk.dlam_w_ds * pw + mk.dlam_nw_ds * pnw);
    let du_dsk1 = t * (1.0 - beta) * (mk1.dlam_w_ds * pw + mk1.dlam_nw_ds * pnw);
    InterfaceVelocity {
        u,
        du_ddp,
        du_dsk,
        du_dsk1,
        beta,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct PhaseFlux {
    pub f: f64,
    pub df_ddp: f64,
    pub df_dsk: f64,
    pub df_dsk1: f64,
}

/// Phase-potential upwinding: `F_l = T lam_l(S_upw) (dp + rho_l g dz)`,
/// upstream vertex `k` when the potential difference is non-negative.
/// Returns `[wetting, non-wetting]`.
pub fn ppu_flux(
    t: f64,
    dp: f64,
    dz: f64,
    mk: &MobilitySet,
    mk1: &MobilitySet,
    fluid: &FluidModel,
) -> [PhaseFlux; 2] {
    let one = |dphi: f64, lk: f64, dlk: f64, lk1: f64, dlk1: f64| {
        if dphi >= 0.0 {
            PhaseFlux {
                f: t * lk * dphi,
                df_ddp: t * lk,
                df_dsk: t * dlk * dphi,
                df_dsk1: 0.0,
            }
        } else {
            PhaseFlux {
                f: t * lk1 * dphi,
                df_ddp: t * lk1,
                df_dsk: 0.0,
                df_dsk1: t * dlk1 * dphi,
            }
        }
    };
    [
        one(dp + fluid.gamma_w() * dz, mk.lam_w, mk.dlam_w_ds, mk1.lam_w, mk1.dlam_w_ds),
        one(dp + fluid.gamma_nw() * dz, mk.lam_nw, mk.dlam_nw_ds, mk1.lam_nw, mk1.dlam_nw_ds),
    ]
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn fluid() -> FluidModel {
        FluidModel::new(64.0, 32.0, 1.0, 100.0, 2.0, 4.0, 1.0 / 144.0).unwrap()
    }

    #[test]
    fn beta_limits() {
        assert_eq!(upstream_weight(3.0, 0.0).0, 0.5);
        assert!(upstream_weight(1e12, 1.0).0 > 1.0 - 1e-10);
        assert_eq!(upstream_weight(f64::INFINITY, -2.0), (0.0, 0.0));
    }

    #[test]
    fn uniform_state_flat() {
        let f = fluid();
        let m = f.mobilities(0.4);
        for dp in [-2.0, 0.0, 3.0] {
            let v = total_velocity(1.7, dp, 0.0, &m, &m, &f, 5.0);
            assert_relative_eq!(v.u, 1.7 * m.lam_t * dp, max_relative = 1e-15);
        }
    }

    #[test]
    fn partials_fd() {
        let f = fluid();
        let (sk, sk1, dp, dz) = (0.3, 0.7, 0.002, 0.02);
        let gamma = 300.0;
        let eval = |sk: f64, sk1: f64, dp: f64| {
            total_velocity(2.0, dp, dz, &f.mobilities(sk), &f.mobilities(sk1), &f, gamma)
        };
        let v = eval(sk, sk1, dp);
        let h = 1e-7;
        let fd_dp = (eval(sk, sk1, dp + h).u - eval(sk, sk1, dp - h).u) / (2.0 * h);
        let fd_sk = (eval(sk + h, sk1, dp).u - eval(sk - h, sk1, dp).u) / (2.0 * h);
        let fd_sk1 = (eval(sk, sk1 + h, dp).u - eval(sk, sk1 - h, dp).u) / (2.0 * h);
        assert_relative_eq!(v.du_ddp, fd_dp, max_relative = 1e-6);
        assert_relative_eq!(v.du_dsk, fd_sk, max_relative = 1e-6);
        assert_relative_eq!(v.du_dsk1, fd_sk1, max_relative = 1e-6);
    }

    #[test]
    fn ppu_zero_potential() {
        let f = fluid();
        let m = f.mobilities(0.5);
        let dz = 0.3;
        let dp = -f.gamma_w() * dz;
        let [w, _] = ppu_flux(1.0, dp, dz, &m, &m, &f);
        assert_eq!(w.f, 0.0);
    }

    #[test]
    fn ppu_uniform_total() {
        let f = fluid();
        let m = f.mobilities(0.35);
        let (t, dp, dz) = (1.3, 0.5, 0.1);
        let [w, nw] = ppu_flux(t, dp, dz, &m, &m, &f);
        let expect = t * m.lam_t * dp + t * (m.lam_w * f.gamma_w() + m.lam_nw * f.gamma_nw()) * dz;
        assert_relative_eq!(w.f + nw.f, expect, max_relative = 1e-14);
    }

    #[test]
    fn ppu_segregation_signs() {
        let f = fluid();
        let m = f.mobilities(0.5);
        let [w, nw] = ppu_flux(1.0, 0.0, 1.0, &m, &m, &f);
        assert!(w.f > 0.0 && nw.f > 0.0);
        // with a pressure gradient balancing the mean weight the phases separate
        let dp = -0.5 * (f.gamma_w() + f.gamma_nw());
        let [w, nw] = ppu_flux(1.0, dp, 1.0, &m, &m, &f);
        assert!(w.f > 0.0 && nw.f < 0.0);
    }
}
