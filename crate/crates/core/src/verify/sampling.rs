//! Stratified random samplers for interaction regions and their states.

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::fluid::FluidModel;
use crate::flux::mat4::Vec4;
use crate::grid::{InteractionRegion, GRAVITY_PSI};

pub type SampleRng = ChaCha8Rng;

pub fn rng(seed: u64) -> SampleRng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Sign pattern forced on `(u_k, u_{k-1})` for the vertex under study.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum VelocityCase {
    /// `u_k <= 0 <= u_{k-1}`: both half interfaces flow into vertex `k`.
    Inflow,
    /// `u_{k-1} <= 0 <= u_k`: both flow out of vertex `k`.
    Outflow,
    /// Both nonnegative: flow passes through vertex `k`.
    Forward,
    /// Both nonpositive.
    Backward,
}

impl VelocityCase {
    pub const ALL: [VelocityCase; 4] = [
        VelocityCase::Inflow,
        VelocityCase::Outflow,
        VelocityCase::Forward,
        VelocityCase::Backward,
    ];

    fn signs(self) -> (f64, f64) {
        match self {
            VelocityCase::Inflow => (-1.0, 1.0),
            VelocityCase::Outflow => (1.0, -1.0),
            VelocityCase::Forward => (1.0, 1.0),
            VelocityCase::Backward => (-1.0, -1.0),
        }
    }
}

/// Depth-difference pattern of a region.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DepthPattern {
    /// No depth variation.
    Flat,
    /// Planar tilt `[a, b, -a, -b]`: consecutive half interfaces alternate
    /// between aligned and opposed inclination.
    Planar,
    /// Tilt along one grid axis only, `[a, 0, -a, 0]`.
    AxisAligned,
    /// Random vertex depths, as on a curved surface, restricted to regions
    /// where no half interface is inclined like both of its neighbours.
    /// Planar and radially symmetric depth fields never produce that
    /// configuration.
    General,
}

impl DepthPattern {
    pub const ALL: [DepthPattern; 4] = [
        DepthPattern::Flat,
        DepthPattern::Planar,
        DepthPattern::AxisAligned,
        DepthPattern::General,
    ];
}

fn log_uniform(rng: &mut SampleRng, lo: f64, hi: f64) -> f64 {
    let (a, b) = (libm::log(lo), libm::log(hi));
    libm::exp(rng.gen_range(a..b))
}

fn signed(rng: &mut SampleRng, scale: f64) -> f64 {
    let v = rng.gen_range(-scale..scale);
    if v == 0.0 {
        scale * 0.5
    } else {
        v
    }
}

/// A random region with transmissibilities in `[0.1, 10]` and the given
/// depth pattern with differences up to one unit.
pub fn region(rng: &mut SampleRng, pattern: DepthPattern) -> InteractionRegion {
    let half_t = core::array::from_fn(|_| log_uniform(rng, 0.1, 10.0));
    let half_dz = match pattern {
        DepthPattern::Flat => [0.0; 4],
        DepthPattern::Planar => {
            let (a, b) = (signed(rng, 1.0), signed(rng, 1.0));
            [a, b, -a, -b]
        }
        DepthPattern::AxisAligned => {
            let a = signed(rng, 1.0);
            if rng.gen_bool(0.5) {
                [a, 0.0, -a, 0.0]
            } else {
                [0.0, a, 0.0, -a]
            }
        }
        DepthPattern::General => loop {
            let z: Vec4 = core::array::from_fn(|_| rng.gen_range(-1.0..1.0));
            let dz = core::array::from_fn(|k| z[InteractionRegion::next(k)] - z[k]);
            if !doubly_aligned(&dz) {
                break dz;
            }
        },
    };
    InteractionRegion {
        vertex_cells: [0, 1, 3, 2],
        half_t,
        half_dz,
        half_len: [0.5; 4],
        dist: [1.0; 4],
        normal: [(0.0, 1.0), (-1.0, 0.0), (0.0, -1.0), (1.0, 0.0)],
    }
}

/// True when some half interface shares its inclination with both
/// neighbouring half interfaces.
pub fn doubly_aligned(dz: &Vec4) -> bool {
    (0..4).any(|k| dz[k] * dz[InteractionRegion::next(k)] > 0.0 && dz[k] * dz[InteractionRegion::prev(k)] > 0.0)
}

/// Saturations in `[0, 1]`, with the endpoints drawn one time in ten.
pub fn saturations(rng: &mut SampleRng) -> Vec4 {
    core::array::from_fn(|_| match rng.gen_range(0..20) {
        0 => 0.0,
        1 => 1.0,
        _ => rng.gen_range(0.0..1.0),
    })
}

/// Total velocities in `[-1, 1]^4` with the signs of `u_k` and `u_{k-1}`
/// forced by `case`.
pub fn velocities(rng: &mut SampleRng, k: usize, case: VelocityCase) -> Vec4 {
    let mut u: Vec4 = core::array::from_fn(|_| signed(rng, 1.0));
    let (sk, sp) = case.signs();
    let p = InteractionRegion::prev(k);
    u[k] = sk * libm::fabs(u[k]);
    u[p] = sp * libm::fabs(u[p]);
    u
}

/// The benchmark fluids plus one with a heavier non-wetting phase.
pub fn fluids() -> [FluidModel; 3] {
    let f = |rho_w, rho_nw, mu_nw, ew, enw| FluidModel::new(rho_w, rho_nw, 1.0, mu_nw, ew, enw, GRAVITY_PSI).expect("valid constants");
    [f(64.0, 32.0, 100.0, 2.0, 4.0), f(64.0, 32.0, 2.0, 1.5, 2.0), f(40.0, 62.0, 5.0, 3.0, 2.0)]
}
