//! Rock-fluid properties: Corey relative permeabilities, phase mobilities
//! and vertex mobility ratios, all with analytic saturation derivatives.
//!
//! Saturation arguments are the wetting saturation `S`. Inputs outside
//! `[0, 1]` are clamped before evaluation; the derivative of a clamped
//! evaluation is the derivative at the clamped point.

use crate::math;

/// Lower bound used to detect a vanishing total mobility.
pub const MIN_TOTAL_MOBILITY: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, thiserror::Error)]
pub enum FluidError {
    #[error("invalid fluid model: {0}")]
    InvalidModel(&'static str),
    #[error("total mobility {0:e} is below the admissible bound")]
    DegenerateMobility(f64),
}

/// Two immiscible, incompressible phases with Corey-type relative
/// permeabilities `krw = S^a`, `krnw = (1 - S)^b`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FluidModel {
    /// Wetting phase density [lbm/ft^3].
    pub rho_w: f64,
    /// Non-wetting phase density [lbm/ft^3].
    pub rho_nw: f64,
    /// Wetting phase viscosity [cP].
    pub mu_w: f64,
    /// Non-wetting phase viscosity [cP].
    pub mu_nw: f64,
    /// Corey exponent of the wetting phase.
    pub w_exponent: f64,
    /// Corey exponent of the non-wetting phase.
    pub nw_exponent: f64,
    /// Converts `rho * dz` to a pressure difference. In the internal unit
    /// system (psi, ft, lbm/ft^3) this is `1/144`.
    pub g: f64,
}

/// Phase mobilities at one saturation, with derivatives w.r.t. `S`.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct MobilitySet {
    pub lam_w: f64,
    pub lam_nw: f64,
    pub lam_t: f64,
    pub dlam_w_ds: f64,
    pub dlam_nw_ds: f64,
    pub dlam_t_ds: f64,
}

/// Mobility ratios `chi = lambda / lambda_T` at a vertex.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct VertexChi {
    pub chi_w: f64,
    pub chi_nw: f64,
    pub dchi_w_ds: f64,
    pub dchi_nw_ds: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RelPerm {
    pub krw: f64,
    pub krnw: f64,
    pub dkrw_ds: f64,
    pub dkrnw_ds: f64,
}

#[inline]
pub fn clamp_saturation(s: f64) -> f64 {
    if s.is_nan() {
        return s;
    }
    s.clamp(0.0, 1.0)
}

impl FluidModel {
    pub fn new(
        rho_w: f64,
        rho_nw: f64,
        mu_w: f64,
        mu_nw: f64,
        w_exponent: f64,
        nw_exponent: f64,
        g: f64,
    ) -> Result<Self, FluidError> {
        let m = Self {
            rho_w,
            rho_nw,
            mu_w,
            mu_nw,
            w_exponent,
            nw_exponent,
            g,
        };
        m.validate()?;
        Ok(m)
    }

    pub fn validate(&self) -> Result<(), FluidError> {
        if !(self.rho_w > 0.0 && self.rho_nw > 0.0) {
            return Err(FluidError::InvalidModel("densities must be positive"));
        }
        if !(self.mu_w > 0.0 && self.mu_nw > 0.0) {
            return Err(FluidError::InvalidModel("viscosities must be positive"));
        }
        if !(self.w_exponent >= 1.0 && self.nw_exponent >= 1.0) {
            return Err(FluidError::InvalidModel("Corey exponents must be >= 1"));
        }
        if !(self.g >= 0.0 && self.g.is_finite()) {
            return Err(FluidError::InvalidModel("gravity factor must be finite and >= 0"));
        }
        Ok(())
    }

    /// Phase weights `rho_l * g` [pressure per unit depth].
    #[inline]
    pub fn gamma_w(&self) -> f64 {
        self.rho_w * self.g
    }

    #[inline]
    pub fn gamma_nw(&self) -> f64 {
        self.rho_nw * self.g
    }

    pub fn relperm(&self, s: f64) -> RelPerm {
        let s = clamp_saturation(s);
        let a = self.w_exponent;
        let b = self.nw_exponent;
        let so = 1.0 - s;
        RelPerm {
            krw: math::powf(s, a),
            krnw: math::powf(so, b),
            dkrw_ds: a * math::powf(s, a - 1.0),
            dkrnw_ds: -b * math::powf(so, b - 1.0),
        }
    }

    pub fn mobilities(&self, s: f64) -> MobilitySet {
        let kr = self.relperm(s);
        let lam_w = kr.krw / self.mu_w;
        let lam_nw = kr.krnw / self.mu_nw;
        let dlam_w_ds = kr.dkrw_ds / self.mu_w;
        let dlam_nw_ds = kr.dkrnw_ds / self.mu_nw;
        MobilitySet {
            lam_w,
            lam_nw,
            lam_t: lam_w + lam_nw,
            dlam_w_ds,
            dlam_nw_ds,
            dlam_t_ds: dlam_w_ds + dlam_nw_ds,
        }
    }

    /// Fractional flow `f_w = lambda_w / lambda_T` and its derivative.
    pub fn fractional_flow(&self, s: f64) -> (f64, f64) {
        let m = self.mobilities(s);
        let c = vertex_chi(&m).unwrap_or_default();
        (c.chi_w, c.dchi_w_ds)
    }

    /// `max_S |df_w/dS|` by dense sampling; used for CFL reporting only.
    pub fn max_fractional_flow_slope(&self) -> f64 {
        let n = 2000;
        let mut best: f64 = 0.0;
        for i in 0..=n {
            let s = i as f64 / n as f64;
            best = best.max(math::abs(self.fractional_flow(s).1));
        }
        best
    }
}

/// Vertex mobility ratios. `chi_w + chi_nw` is exactly one because
/// `chi_nw` is formed as the complement.
pub fn vertex_chi(m: &MobilitySet) -> Result<VertexChi, FluidError> {
    if !(m.lam_t >= MIN_TOTAL_MOBILITY) {
        return Err(FluidError::DegenerateMobility(m.lam_t));
    }
    let chi_w = m.lam_w / m.lam_t;
    let dchi_w_ds = (m.dlam_w_ds * m.lam_nw - m.lam_w * m.dlam_nw_ds) / (m.lam_t * m.lam_t);
    Ok(VertexChi {
        chi_w,
        chi_nw: 1.0 - chi_w,
        dchi_w_ds,
        dchi_nw_ds: -dchi_w_ds,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn three_well() -> FluidModel {
        FluidModel::new(64.0, 32.0, 1.0, 100.0, 2.0, 4.0, 1.0 / 144.0).unwrap()
    }

    #[test]
    fn relperm_endpoints() {
        let f = three_well();
        let r0 = f.relperm(0.0);
        assert_eq!((r0.krw, r0.krnw), (0.0, 1.0));
        let r1 = f.relperm(1.0);
        assert_eq!((r1.krw, r1.krnw), (1.0, 0.0));
    }

    #[test]
    fn relperm_midpoint() {
        let r = three_well().relperm(0.5);
        assert_relative_eq!(r.krw, 0.25);
        assert_relative_eq!(r.krnw, 0.0625);
        assert_relative_eq!(r.dkrw_ds, 1.0);
        assert_relative_eq!(r.dkrnw_ds, -0.5);
    }

    #[test]
    fn clamps_out_of_range() {
        let f = three_well();
        assert_eq!(f.relperm(-0.3), f.relperm(0.0));
        assert_eq!(f.relperm(1.7), f.relperm(1.0));
    }

    #[test]
    fn mobilities_midpoint() {
        let m = three_well().mobilities(0.5);
        assert_relative_eq!(m.lam_w, 0.25);
        assert_relative_eq!(m.lam_nw, 0.000625);
        assert_eq!(m.lam_t, m.lam_w + m.lam_nw);
        assert_eq!(three_well().mobilities(1.0).lam_nw, 0.0);
    }

    #[test]
    fn chi_values() {
        let f = three_well();
        let c1 = vertex_chi(&f.mobilities(1.0)).unwrap();
        assert_eq!((c1.chi_w, c1.chi_nw), (1.0, 0.0));
        let c0 = vertex_chi(&f.mobilities(0.0)).unwrap();
        assert_eq!((c0.chi_w, c0.chi_nw), (0.0, 1.0));
        let c = vertex_chi(&f.mobilities(0.5)).unwrap();
        assert_relative_eq!(c.chi_w, 0.25 / 0.250625, max_relative = 1e-15);
    }

    #[test]
    fn degenerate_mobility_is_reported() {
        let m = MobilitySet::default();
        assert!(matches!(vertex_chi(&m), Err(FluidError::DegenerateMobility(_))));
    }

    #[test]
    fn rejects_bad_models() {
        assert!(FluidModel::new(-1.0, 32.0, 1.0, 1.0, 2.0, 2.0, 1.0).is_err());
        assert!(FluidModel::new(64.0, 32.0, 0.0, 1.0, 2.0, 2.0, 1.0).is_err());
        assert!(FluidModel::new(64.0, 32.0, 1.0, 1.0, 0.5, 2.0, 1.0).is_err());
    }

    fn central(f: impl Fn(f64) -> f64, s: f64) -> f64 {
        let h = 1e-7;
        (f(s + h) - f(s - h)) / (2.0 * h)
    }

    fn rel_err(a: f64, b: f64) -> f64 {
        math::abs(a - b) / math::abs(b).max(1e-8)
    }

    #[test]
    fn derivatives_match_finite_differences() {
        let models = [
            three_well(),
            FluidModel::new(64.0, 32.0, 1.0, 2.0, 1.5, 2.0, 1.0 / 144.0).unwrap(),
        ];
        for f in models {
            for i in 1..=99 {
                let s = i as f64 / 100.0;
                let r = f.relperm(s);
                assert!(rel_err(r.dkrw_ds, central(|x| f.relperm(x).krw, s)) < 1e-6);
                assert!(rel_err(r.dkrnw_ds, central(|x| f.relperm(x).krnw, s)) < 1e-6);
                let m = f.mobilities(s);
                assert!(rel_err(m.dlam_w_ds, central(|x| f.mobilities(x).lam_w, s)) < 1e-6);
                assert!(rel_err(m.dlam_nw_ds, central(|x| f.mobilities(x).lam_nw, s)) < 1e-6);
                let c = vertex_chi(&m).unwrap();
                let fd = central(|x| vertex_chi(&f.mobilities(x)).unwrap().chi_w, s);
                // chi is O(1), so central differences carry ~eps/h of rounding noise
                let noise = 4.0 * f64::EPSILON / 1e-7;
                assert!(math::abs(c.dchi_w_ds - fd) <= 1e-6 * math::abs(fd) + noise, "s={s} {} {fd}", c.dchi_w_ds);
                assert!(m.dlam_w_ds >= 0.0 && m.dlam_nw_ds <= 0.0);
            }
        }
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #![proptest_config(ProptestConfig::with_cases(10_000))]
            #[test]
            fn chi_partition_of_unity(s in 0.0f64..=1.0) {
                let c = vertex_chi(&three_well().mobilities(s)).unwrap();
                prop_assert!(math::abs(c.chi_w + c.chi_nw - 1.0) <= 1e-14);
                prop_assert!(three_well().mobilities(s).lam_t > 0.0);
            }
        }
    }
}
