//! Viscous coupling inside an interaction region.
//!
//! Given a driving 4-vector of half-interface velocities, each half
//! interface takes a weighted average of its upwind vertex value and the
//! interfacial value at the neighbouring upstream half interface:
//!
//! ```text
//! A xbar = B x,    xbar = C x,    C = A^{-1} B
//! ```
//!
//! `A` has a unit diagonal and one off-diagonal `-omega_k` per row, `B`
//! carries `1 - omega_k` in the upwind vertex column. The same machinery
//! averages mobility ratios (hybrid upwinding, driven by the total
//! velocity) and phase mobilities (multidimensional phase-potential
//! upwinding, driven by the mobility-free phase fluxes).

use super::limiter::{Limiter, MAX_RATIO};
use super::mat4::{self, Mat4, Vec4};
use super::FluxError;
use crate::grid::InteractionRegion as Ir;

/// `omega_k` and its partials with respect to the four drive components.
pub fn omega_viscous(u: &Vec4, k: usize, limiter: Limiter) -> (f64, Vec4) {
    let mut d = [0.0; 4];
    let uk = u[k];
    let other = if uk > 0.0 {
        Ir::prev(k)
    } else if uk < 0.0 {
        Ir::next(k)
    } else {
        return (0.0, d);
    };
    let ratio = u[other] / uk;
    if !(ratio > 0.0) {
        return (limiter.value(0.0), d);
    }
    if ratio > MAX_RATIO {
        return (limiter.value(MAX_RATIO), d);
    }
    let (w, dw) = limiter.eval(ratio);
    d[other] = dw / uk;
    d[k] = -dw * ratio / uk;
    (w, d)
}

/// Assembled coupling matrices for one drive vector.
#[derive(Debug, Clone, Copy)]
pub struct Coupling {
    pub omega: Vec4,
    /// `d omega_k / d u_m`.
    pub domega: Mat4,
    pub a: Mat4,
    pub b: Mat4,
    pub a_inv: Mat4,
    pub c: Mat4,
    /// Column of the off-diagonal entry of `A` in row `k`.
    pub off_col: [usize; 4],
    /// Column of the nonzero entry of `B` in row `k` (the upwind vertex).
    pub upwind: [usize; 4],
}

/// Builds `A` and `B` from a drive vector and weights.
pub fn viscous_coupling(u: &Vec4, omega: &Vec4) -> (Mat4, Mat4, [usize; 4], [usize; 4]) {
    let mut a = mat4::IDENTITY;
    let mut b = [[0.0; 4]; 4];
    let mut off_col = [0; 4];
    let mut upwind = [0; 4];
    for k in 0..4 {
        if u[k] >= 0.0 {
            off_col[k] = Ir::prev(k);
            upwind[k] = k;
        } else {
            off_col[k] = Ir::next(k);
            upwind[k] = Ir::next(k);
        }
        a[k][off_col[k]] = -omega[k];
        b[k][upwind[k]] = 1.0 - omega[k];
    }
    (a, b, off_col, upwind)
}

impl Coupling {
    pub fn new(u: &Vec4, limiter: Limiter) -> Result<Self, FluxError> {
        let mut omega = [0.0; 4];
        let mut domega = [[0.0; 4]; 4];
        for k in 0..4 {
            let (w, d) = omega_viscous(u, k, limiter);
            omega[k] = w;
            domega[k] = d;
        }
        Self::with_omega(u, omega, domega)
    }

    pub fn with_omega(u: &Vec4, omega: Vec4, domega: Mat4) -> Result<Self, FluxError> {
        let (a, b, off_col, upwind) = viscous_coupling(u, &omega);
        let a_inv = mat4::inverse(&a).ok_or(FluxError::SingularSystem)?;
        let c = mat4::mul(&a_inv, &b);
        Ok(Self {
            omega,
            domega,
            a,
            b,
            a_inv,
            c,
            off_col,
            upwind,
        })
    }

    /// Interfacial values `C x`.
    #[inline]
    pub fn average(&self, x: &Vec4) -> Vec4 {
        mat4::mul_vec(&self.c, x)
    }

    /// `d xbar / d u` at fixed vertex values, from differentiating
    /// `A xbar = B x` through the weights.
    pub fn d_average_d_drive(&self, xbar: &Vec4, x: &Vec4) -> Mat4 {
        // rhs_k = domega_k * (xbar[off] - x[upwind])
        let mut rhs = [[0.0; 4]; 4];
        for k in 0..4 {
            let w = xbar[self.off_col[k]] - x[self.upwind[k]];
            for m in 0..4 {
                rhs[k][m] = self.domega[k][m] * w;
            }
        }
        mat4::mul(&self.a_inv, &rhs)
    }
}

/// `chi_bar = A^{-1} B chi`.
pub fn interfacial_chi(coupling: &Coupling, chi: &Vec4) -> Vec4 {
    coupling.average(chi)
}

/// Partials of the interfacial values with respect to the region unknowns
/// `(p_0..p_3, S_0..S_3)`:
///
/// `d xbar/d tau = A^{-1} (-(dA/dtau) xbar + (dB/dtau) x + B dx/dtau)`.
///
/// `dx_ds[j]` is the derivative of vertex value `j` w.r.t. `S_j`; `du` holds
/// the drive partials. With `freeze` set the weights are treated as
/// constants.
pub fn chi_derivatives(
    coupling: &Coupling,
    xbar: &Vec4,
    x: &Vec4,
    dx_ds: &Vec4,
    du: &[[f64; 8]; 4],
    freeze: bool,
) -> [[f64; 8]; 4] {
    let mut out = [[0.0; 8]; 4];
    for k in 0..4 {
        for j in 0..4 {
            out[k][4 + j] = coupling.c[k][j] * dx_ds[j];
        }
    }
    if !freeze {
        let m = coupling.d_average_d_drive(xbar, x);
        for k in 0..4 {
            for col in 0..8 {
                let mut acc = 0.0;
                for q in 0..4 {
                    acc += m[k][q] * du[q][col];
                }
                out[k][col] += acc;
            }
        }
    }
    out
}

/// `V_k = chi_bar_k u_k`.
pub fn viscous_flux(chi_bar: &Vec4, u: &Vec4) -> Vec4 {
    [
        chi_bar[0] * u[0],
        chi_bar[1] * u[1],
        chi_bar[2] * u[2],
        chi_bar[3] * u[3],
    ]
}
