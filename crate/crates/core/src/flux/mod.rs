//! Half-interface fluxes for the four upwinding schemes.
//!
//! Every kernel returns values together with analytic partials with respect
//! to the eight unknowns of an interaction region, ordered
//! `(p_0, p_1, p_2, p_3, S_0, S_1, S_2, S_3)`.

pub mod buoyancy;
pub mod limiter;
pub mod mat4;
pub mod region;
pub mod total_velocity;
pub mod viscous;

use thiserror::Error;

pub use buoyancy::{buoyancy_flux, buoyancy_psi, harmonic, omega_gravity, GravityBranch};
pub use limiter::{Limiter, MAX_RATIO};
pub use region::{fixed_velocity_wetting_flux, region_fluxes, FluxEvaluation, RegionState};
pub use total_velocity::{gamma_bar, ppu_flux, total_velocity, upstream_weight, GammaConfig};
pub use viscous::{chi_derivatives, interfacial_chi, omega_viscous, viscous_coupling, viscous_flux, Coupling};

use crate::fluid::FluidError;

#[derive(Debug, Clone, Copy, PartialEq, Error)]
pub enum FluxError {
    #[error("coupling matrix is singular")]
    SingularSystem,
    #[error(transparent)]
    Fluid(#[from] FluidError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum Scheme {
    #[cfg_attr(feature = "serde", serde(rename = "ppu_1d", alias = "PPU_1D", alias = "1D-PPU"))]
    Ppu1d,
    #[cfg_attr(feature = "serde", serde(rename = "ihu_1d", alias = "IHU_1D", alias = "1D-IHU"))]
    Ihu1d,
    #[cfg_attr(feature = "serde", serde(rename = "multid_ppu", alias = "MULTID_PPU", alias = "MultiD-PPU"))]
    MultiDPpu,
    #[cfg_attr(feature = "serde", serde(rename = "multid_ihu", alias = "MULTID_IHU", alias = "MultiD-IHU"))]
    MultiDIhu,
}

impl Scheme {
    pub const ALL: [Scheme; 4] = [Scheme::Ppu1d, Scheme::Ihu1d, Scheme::MultiDPpu, Scheme::MultiDIhu];

    pub fn name(self) -> &'static str {
        match self {
            Scheme::Ppu1d => "1D-PPU",
            Scheme::Ihu1d => "1D-IHU",
            Scheme::MultiDPpu => "MultiD-PPU",
            Scheme::MultiDIhu => "MultiD-IHU",
        }
    }

    /// Accepts the display names as well as `PPU_1D`-style identifiers.
    pub fn parse(s: &str) -> Option<Self> {
        let key: alloc::string::String = s
            .chars()
            .filter(|c| c.is_ascii_alphanumeric())
            .map(|c| c.to_ascii_lowercase())
            .collect();
        match key.as_str() {
            "1dppu" | "ppu1d" => Some(Scheme::Ppu1d),
            "1dihu" | "ihu1d" => Some(Scheme::Ihu1d),
            "multidppu" => Some(Scheme::MultiDPpu),
            "multidihu" => Some(Scheme::MultiDIhu),
            _ => None,
        }
    }

    pub fn default_limiter(self) -> Limiter {
        match self {
            Scheme::Ppu1d | Scheme::Ihu1d => Limiter::Zero,
            Scheme::MultiDPpu => Limiter::Smu,
            Scheme::MultiDIhu => Limiter::Smu4,
        }
    }

    pub fn is_ihu(self) -> bool {
        matches!(self, Scheme::Ihu1d | Scheme::MultiDIhu)
    }

    pub fn is_multid(self) -> bool {
        matches!(self, Scheme::MultiDPpu | Scheme::MultiDIhu)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SchemeConfig {
    pub scheme: Scheme,
    /// Ignored by the two-point schemes.
    pub limiter: Limiter,
    /// Drop the velocity sensitivity of the viscous weights from the
    /// Jacobian. The residual always uses the true weights.
    pub freeze_omega: bool,
    pub gamma: GammaConfig,
}

impl SchemeConfig {
    pub fn new(scheme: Scheme) -> Self {
        Self {
            scheme,
            limiter: scheme.default_limiter(),
            freeze_omega: false,
            gamma: GammaConfig::default(),
        }
    }

    pub fn with_limiter(mut self, limiter: Limiter) -> Self {
        self.limiter = limiter;
        self
    }

    pub fn with_freeze(mut self, freeze: bool) -> Self {
        self.freeze_omega = freeze;
        self
    }

    /// Limiter actually applied by the kernels.
    pub fn effective_limiter(&self) -> Limiter {
        match self.scheme {
            Scheme::Ppu1d | Scheme::Ihu1d => Limiter::Zero,
            _ => self.limiter,
        }
    }
}

impl Default for SchemeConfig {
    fn default() -> Self {
        Self::new(Scheme::MultiDIhu)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn scheme_names_roundtrip() {
        for s in Scheme::ALL {
            assert_eq!(Scheme::parse(s.name()), Some(s));
        }
        assert_eq!(Scheme::parse("MULTID_IHU"), Some(Scheme::MultiDIhu));
        assert_eq!(Scheme::parse("PPU_1D"), Some(Scheme::Ppu1d));
        assert_eq!(Scheme::parse("upwind"), None);
    }

    #[test]
    fn default_limiters() {
        assert_eq!(SchemeConfig::default().limiter, Limiter::Smu4);
        assert_eq!(SchemeConfig::new(Scheme::MultiDPpu).limiter, Limiter::Smu);
        let c = SchemeConfig::new(Scheme::Ihu1d).with_limiter(Limiter::Smu4);
        assert_eq!(c.effective_limiter(), Limiter::Zero);
    }
}
