//! Builders for the three benchmark problems and their diagnostics.
//!
//! Every case lives on a square domain with an active disc of radius
//! `(L - dx) / 2` centered at the origin. Geometry that depends on the
//! orientation (wells, depth gradients, channels, barriers) is defined in
//! the rotated frame `(x', y')` and sampled at cell centers.

pub mod diagnostics;
pub mod run;

pub use run::{run_case, RunOutcome};

use alloc::vec::Vec;
use core::f64::consts::PI;
use thiserror::Error;

use crate::fluid::FluidModel;
use crate::flux::SchemeConfig;
use crate::grid::{rotate_coords, CartesianGrid, DualGrid, GridError, GridSpec, DARCY_CONSTANT, GRAVITY_PSI};
use crate::math;
use crate::solver::{FixedPressure, Injector, Problem, Producer, SimState, SolverError, WellSet};

#[cfg(feature = "serde")]
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum CaseError {
    #[error("invalid case: {0}")]
    InvalidSpec(&'static str),
    #[error(transparent)]
    Grid(#[from] GridError),
    #[error(transparent)]
    Solver(#[from] SolverError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
#[cfg_attr(feature = "serde", derive(Serialize, Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum CaseId {
    ThreeWell,
    Heterogeneous,
    Segregation,
}

impl CaseId {
    pub fn name(self) -> &'static str {
        match self {
            CaseId::ThreeWell => "three_well",
            CaseId::Heterogeneous => "heterogeneous",
            CaseId::Segregation => "segregation",
        }
    }
}

/// Which of the two tabulated time steps to use.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
#[cfg_attr(feature = "serde", derive(Serialize, Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum CflLevel {
    Small,
    Large,
}

impl CflLevel {
    pub const ALL: [CflLevel; 2] = [CflLevel::Small, CflLevel::Large];

    pub fn name(self) -> &'static str {
        match self {
            CflLevel::Small => "small",
            CflLevel::Large => "large",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TimeUnit {
    /// Pore volumes injected into the disc.
    Pvi,
    Days,
}

impl TimeUnit {
    pub fn label(self) -> &'static str {
        match self {
            TimeUnit::Pvi => "pvi",
            TimeUnit::Days => "day",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(Serialize, Deserialize))]
#[cfg_attr(feature = "serde", serde(default, deny_unknown_fields))]
pub struct FluidParams {
    pub rho_w: f64,
    pub rho_nw: f64,
    pub mu_w: f64,
    pub mu_nw: f64,
    pub w_exponent: f64,
    pub nw_exponent: f64,
}

impl Default for FluidParams {
    fn default() -> Self {
        Self {
            rho_w: 64.0,
            rho_nw: 32.0,
            mu_w: 1.0,
            mu_nw: 100.0,
            w_exponent: 2.0,
            nw_exponent: 4.0,
        }
    }
}

impl FluidParams {
    pub fn model(&self) -> Result<FluidModel, CaseError> {
        FluidModel::new(
            self.rho_w,
            self.rho_nw,
            self.mu_w,
            self.mu_nw,
            self.w_exponent,
            self.nw_exponent,
            GRAVITY_PSI,
        )
        .map_err(|_| CaseError::InvalidSpec("fluid parameters"))
    }
}

/// Injector at the center, two pressure-controlled producers updip.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(Serialize, Deserialize))]
#[cfg_attr(feature = "serde", serde(default, deny_unknown_fields))]
pub struct ThreeWellParams {
    pub n: usize,
    pub half_width: f64,
    pub k_disc: f64,
    pub k_outside: f64,
    pub porosity: f64,
    /// Producers sit at `(+-r sin(a), -r cos(a))` in the rotated frame.
    pub producer_radius: f64,
    pub producer_angle: f64,
    pub gravity_number: f64,
    pub fluid: FluidParams,
    pub initial_pressure: f64,
    pub producer_bhp: f64,
    pub well_index_factor: f64,
    pub dt_small: f64,
    pub dt_large: f64,
    pub t_end: f64,
}

impl Default for ThreeWellParams {
    fn default() -> Self {
        Self {
            n: 51,
            half_width: 0.5,
            k_disc: 50.0,
            k_outside: 5e-5,
            porosity: 0.2,
            producer_radius: 0.3,
            producer_angle: PI / 6.0,
            gravity_number: 1.3,
            fluid: FluidParams::default(),
            initial_pressure: 1000.0,
            producer_bhp: 1000.0,
            well_index_factor: 1e3,
            dt_small: 0.092 / 70.0,
            dt_large: 0.092 / 4.0,
            t_end: 0.092,
        }
    }
}

/// Central injection on a bump into a channelized disc with a
/// constant-pressure collar.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(Serialize, Deserialize))]
#[cfg_attr(feature = "serde", serde(default, deny_unknown_fields))]
pub struct HeterogeneousParams {
    pub n: usize,
    pub half_width: f64,
    pub k_base: f64,
    pub k_outside: f64,
    pub porosity: f64,
    pub bump_height: f64,
    pub gravity_number: f64,
    pub fluid: FluidParams,
    pub initial_pressure: f64,
    pub dt_small: f64,
    pub dt_large: f64,
    pub t_end: f64,
}

impl Default for HeterogeneousParams {
    fn default() -> Self {
        Self {
            n: 101,
            half_width: 75.0,
            k_base: 200.0,
            k_outside: 1e-10,
            porosity: 0.2,
            bump_height: 20.0,
            gravity_number: 12.9,
            fluid: FluidParams::default(),
            initial_pressure: 1000.0,
            dt_small: 0.06 / 28.0,
            dt_large: 0.01,
            t_end: 0.06,
        }
    }
}

/// Low-permeability layer `|y' - y| < half_thickness`, `x_min < x' < x_max`.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(Serialize, Deserialize))]
#[cfg_attr(feature = "serde", serde(deny_unknown_fields))]
pub struct Barrier {
    pub y: f64,
    pub half_thickness: f64,
    pub x_min: f64,
    pub x_max: f64,
}

impl Barrier {
    fn contains(&self, xp: f64, yp: f64) -> bool {
        math::abs(yp - self.y) < self.half_thickness && xp > self.x_min && xp < self.x_max
    }
}

/// Closed tilted disc where a light plume rises through staggered
/// low-permeability layers.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(Serialize, Deserialize))]
#[cfg_attr(feature = "serde", serde(default, deny_unknown_fields))]
pub struct SegregationParams {
    pub n: usize,
    pub half_width: f64,
    pub k_disc: f64,
    pub k_barrier: f64,
    pub porosity: f64,
    /// Dip of the layered plane: `z = -sin(tilt) y'`.
    pub tilt: f64,
    pub barriers: Vec<Barrier>,
    /// Initial non-wetting band `y_lo < y' < y_hi` inside the disc.
    pub band: (f64, f64),
    pub fluid: FluidParams,
    pub initial_pressure: f64,
    pub dt_small: f64,
    pub dt_large: f64,
    pub t_end: f64,
}

impl Default for SegregationParams {
    fn default() -> Self {
        let layer = |y, x_min, x_max| Barrier {
            y,
            half_thickness: 1.5,
            x_min,
            x_max,
        };
        Self {
            n: 101,
            half_width: 75.0,
            k_disc: 50.0,
            k_barrier: 5e-9,
            porosity: 0.2,
            tilt: PI / 3.0,
            barriers: alloc::vec![layer(-25.0, -75.0, 25.0), layer(5.0, -25.0, 75.0), layer(35.0, -75.0, 25.0)],
            band: (-75.0, -45.0),
            fluid: FluidParams {
                rho_w: 64.0,
                rho_nw: 32.0,
                mu_w: 1.0,
                mu_nw: 2.0,
                w_exponent: 1.5,
                nw_exponent: 2.0,
            },
            initial_pressure: 1000.0,
            dt_small: 100.0,
            dt_large: 200.0,
            t_end: 6000.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(Serialize, Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum CaseParams {
    ThreeWell(ThreeWellParams),
    Heterogeneous(HeterogeneousParams),
    Segregation(SegregationParams),
}

impl CaseParams {
    pub fn default_for(id: CaseId) -> Self {
        match id {
            CaseId::ThreeWell => CaseParams::ThreeWell(ThreeWellParams::default()),
            CaseId::Heterogeneous => CaseParams::Heterogeneous(HeterogeneousParams::default()),
            CaseId::Segregation => CaseParams::Segregation(SegregationParams::default()),
        }
    }

    pub fn id(&self) -> CaseId {
        match self {
            CaseParams::ThreeWell(_) => CaseId::ThreeWell,
            CaseParams::Heterogeneous(_) => CaseId::Heterogeneous,
            CaseParams::Segregation(_) => CaseId::Segregation,
        }
    }

    pub fn resolution(&self) -> usize {
        match self {
            CaseParams::ThreeWell(p) => p.n,
            CaseParams::Heterogeneous(p) => p.n,
            CaseParams::Segregation(p) => p.n,
        }
    }

    pub fn set_resolution(&mut self, n: usize) {
        match self {
            CaseParams::ThreeWell(p) => p.n = n,
            CaseParams::Heterogeneous(p) => p.n = n,
            CaseParams::Segregation(p) => p.n = n,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CaseSpec {
    pub params: CaseParams,
    /// Grid rotation angle in `[0, pi/2)`.
    pub theta: f64,
    pub cfl: CflLevel,
}

impl CaseSpec {
    pub fn new(id: CaseId, theta: f64, cfl: CflLevel) -> Self {
        Self {
            params: CaseParams::default_for(id),
            theta,
            cfl,
        }
    }

    pub fn with_resolution(mut self, n: usize) -> Self {
        self.params.set_resolution(n);
        self
    }

    pub fn validate(&self) -> Result<(), CaseError> {
        if !(self.theta >= 0.0 && self.theta < PI / 2.0) {
            return Err(CaseError::InvalidSpec("theta must lie in [0, pi/2)"));
        }
        if self.params.resolution() < 9 {
            return Err(CaseError::InvalidSpec("resolution must be at least 9"));
        }
        Ok(())
    }
}

/// A fully specified run: discretization, initial state and schedule.
#[derive(Debug, Clone)]
pub struct Case {
    pub id: CaseId,
    pub theta: f64,
    pub grid: CartesianGrid,
    pub fluid: FluidModel,
    pub wells: WellSet,
    pub initial: SimState,
    /// Cells inside the active disc.
    pub disc: Vec<bool>,
    pub disc_radius: f64,
    pub disc_pore_volume: f64,
    /// Total injection rate [ft^3/day]; zero for closed cases.
    pub injection_rate: f64,
    pub time_unit: TimeUnit,
    /// Nominal step and horizon in `time_unit`.
    pub dt_nominal: f64,
    pub t_end_nominal: f64,
    /// The same in days.
    pub dt: f64,
    pub t_end: f64,
}

impl Case {
    pub fn problem(&self, scheme: SchemeConfig) -> Result<Problem, SolverError> {
        Problem::new(self.grid.clone(), self.fluid, self.wells.clone(), scheme)
    }

    /// Converts days to the case's reporting unit.
    pub fn to_unit(&self, days: f64) -> f64 {
        match self.time_unit {
            TimeUnit::Pvi => days * self.injection_rate / self.disc_pore_volume,
            TimeUnit::Days => days,
        }
    }
}

/// Physical position of a point given in the rotated frame.
pub fn unrotate(xp: f64, yp: f64, theta: f64) -> (f64, f64) {
    rotate_coords(xp, yp, -theta)
}

fn disc_mask(grid: &CartesianGrid, r0: f64) -> Vec<bool> {
    (0..grid.num_cells())
        .map(|c| {
            let (x, y) = grid.center(c);
            math::sqrt(x * x + y * y) < r0
        })
        .collect()
}

fn disc_pore_volume(grid: &CartesianGrid, disc: &[bool]) -> f64 {
    disc.iter()
        .enumerate()
        .filter(|(_, d)| **d)
        .map(|(c, _)| grid.pore_volume(c))
        .sum()
}

/// Injection rate giving gravity number `n_g` for a front of width `2 r0`:
/// `N_G = C k g |drho| / (mu_w |u_T|)`.
fn rate_from_gravity_number(k: f64, fluid: &FluidModel, n_g: f64, width: f64, thickness: f64) -> f64 {
    let u = DARCY_CONSTANT * k * fluid.g * math::abs(fluid.rho_w - fluid.rho_nw) / (fluid.mu_w * n_g);
    u * width * thickness
}

fn schedule(cfl: CflLevel, small: f64, large: f64) -> f64 {
    match cfl {
        CflLevel::Small => small,
        CflLevel::Large => large,
    }
}

pub fn build_case(spec: &CaseSpec) -> Result<Case, CaseError> {
    spec.validate()?;
    match &spec.params {
        CaseParams::ThreeWell(p) => three_well_case(p, spec.theta, spec.cfl),
        CaseParams::Heterogeneous(p) => heterogeneous_case(p, spec.theta, spec.cfl),
        CaseParams::Segregation(p) => segregation_case(p, spec.theta, spec.cfl),
    }
}

/// Producer positions in physical coordinates.
pub fn three_well_producers(p: &ThreeWellParams, theta: f64) -> [(f64, f64); 2] {
    let a = p.producer_angle;
    let yp = -p.producer_radius * math::cos(a);
    let xp = p.producer_radius * math::sin(a);
    [unrotate(-xp, yp, theta), unrotate(xp, yp, theta)]
}

pub fn three_well_case(p: &ThreeWellParams, theta: f64, cfl: CflLevel) -> Result<Case, CaseError> {
    let spec = GridSpec::square(p.n, p.half_width);
    let dx = 2.0 * p.half_width / p.n as f64;
    let r0 = (2.0 * p.half_width - dx) / 2.0;
    let grid = CartesianGrid::build(
        spec,
        |x, y| {
            if math::sqrt(x * x + y * y) < r0 {
                p.k_disc
            } else {
                p.k_outside
            }
        },
        |_, _| p.porosity,
        // producers are updip of the injector
        |x, y| rotate_coords(x, y, theta).1,
    )?;
    let fluid = p.fluid.model()?;
    let dual = DualGrid::build(&grid)?;
    let disc = disc_mask(&grid, r0);
    let pv = disc_pore_volume(&grid, &disc);
    let rate = rate_from_gravity_number(p.k_disc, &fluid, p.gravity_number, 2.0 * r0, grid.thickness);
    let producers = three_well_producers(p, theta)
        .into_iter()
        .map(|(x, y)| {
            let cell = grid.locate(x, y);
            Producer {
                cell,
                bhp: p.producer_bhp,
                well_index: p.well_index_factor * dual.max_adjacent_transmissibility(&grid, cell),
            }
        })
        .collect();
    let wells = WellSet {
        injectors: alloc::vec![Injector {
            cell: grid.locate(0.0, 0.0),
            rate,
        }],
        producers,
        ..Default::default()
    };
    let dt_nominal = schedule(cfl, p.dt_small, p.dt_large);
    let to_days = pv / rate;
    let n = grid.num_cells();
    Ok(Case {
        id: CaseId::ThreeWell,
        theta,
        initial: SimState::uniform(n, p.initial_pressure, 0.0),
        grid,
        fluid,
        wells,
        disc,
        disc_radius: r0,
        disc_pore_volume: pv,
        injection_rate: rate,
        time_unit: TimeUnit::Pvi,
        dt_nominal,
        t_end_nominal: p.t_end,
        dt: dt_nominal * to_days,
        t_end: p.t_end * to_days,
    })
}

/// Channelized permeability evaluated in the rotated frame; coordinates are
/// normalized by the half width.
pub fn heterogeneous_permeability(k_base: f64, xp: f64, yp: f64, half_width: f64) -> f64 {
    let (xs, ys) = (xp / half_width, yp / half_width);
    let (xb, yb) = rotate_coords(xs, ys, PI / 4.0);
    let c = |v: f64| math::cos(3.0 * PI * v);
    let f = 1.0 + c(xs) * c(ys) * c(xb) * c(yb) / 2.0;
    k_base * f * f * f
}

/// `20 sin((1 + min(1, r / r0)) pi / 2)`: 20 at the center, 0 at the rim.
pub fn bump_height(amplitude: f64, r: f64, r0: f64) -> f64 {
    amplitude * math::sin((1.0 + (r / r0).min(1.0)) * PI / 2.0)
}

pub fn heterogeneous_case(p: &HeterogeneousParams, theta: f64, cfl: CflLevel) -> Result<Case, CaseError> {
    let spec = GridSpec::square(p.n, p.half_width);
    let dx = 2.0 * p.half_width / p.n as f64;
    let r0 = (2.0 * p.half_width - dx) / 2.0;
    let grid = CartesianGrid::build(
        spec,
        |x, y| {
            if math::sqrt(x * x + y * y) < r0 {
                let (xp, yp) = rotate_coords(x, y, theta);
                heterogeneous_permeability(p.k_base, xp, yp, p.half_width)
            } else {
                p.k_outside
            }
        },
        |_, _| p.porosity,
        |x, y| -bump_height(p.bump_height, math::sqrt(x * x + y * y), r0),
    )?;
    let fluid = p.fluid.model()?;
    let disc = disc_mask(&grid, r0);
    let pv = disc_pore_volume(&grid, &disc);
    let rate = rate_from_gravity_number(p.k_base, &fluid, p.gravity_number, 2.0 * r0, grid.thickness);
    // the collar is the outermost ring of disc cells; its pressure is
    // hydrostatic in the resident non-wetting phase
    let gamma_nw = fluid.gamma_nw();
    let dirichlet = (0..grid.num_cells())
        .filter(|&c| disc[c] && ring_neighbours(&grid, c).any(|d| !disc[d]))
        .map(|c| FixedPressure {
            cell: c,
            pressure: p.initial_pressure + gamma_nw * grid.depth[c],
        })
        .collect();
    let wells = WellSet {
        injectors: alloc::vec![Injector {
            cell: grid.locate(0.0, 0.0),
            rate,
        }],
        dirichlet,
        ..Default::default()
    };
    let dt_nominal = schedule(cfl, p.dt_small, p.dt_large);
    let to_days = pv / rate;
    let n = grid.num_cells();
    Ok(Case {
        id: CaseId::Heterogeneous,
        theta,
        initial: SimState::uniform(n, p.initial_pressure, 0.0),
        grid,
        fluid,
        wells,
        disc,
        disc_radius: r0,
        disc_pore_volume: pv,
        injection_rate: rate,
        time_unit: TimeUnit::Pvi,
        dt_nominal,
        t_end_nominal: p.t_end,
        dt: dt_nominal * to_days,
        t_end: p.t_end * to_days,
    })
}

/// The eight cells around `cell`.
fn ring_neighbours(grid: &CartesianGrid, cell: usize) -> impl Iterator<Item = usize> + '_ {
    let (i, j) = grid.ij(cell);
    (-1isize..=1).flat_map(move |dj| {
        (-1isize..=1).filter_map(move |di| {
            let (a, b) = (i as isize + di, j as isize + dj);
            ((di, dj) != (0, 0) && a >= 0 && b >= 0 && (a as usize) < grid.nx && (b as usize) < grid.ny)
                .then(|| grid.index(a as usize, b as usize))
        })
    })
}

pub fn segregation_case(p: &SegregationParams, theta: f64, cfl: CflLevel) -> Result<Case, CaseError> {
    let spec = GridSpec::square(p.n, p.half_width);
    let dx = 2.0 * p.half_width / p.n as f64;
    let r0 = (2.0 * p.half_width - dx) / 2.0;
    let inside = |x: f64, y: f64| math::sqrt(x * x + y * y) < r0;
    let grid = CartesianGrid::build(
        spec,
        |x, y| {
            let (xp, yp) = rotate_coords(x, y, theta);
            if !inside(x, y) || p.barriers.iter().any(|b| b.contains(xp, yp)) {
                p.k_barrier
            } else {
                p.k_disc
            }
        },
        |_, _| p.porosity,
        |x, y| -math::sin(p.tilt) * rotate_coords(x, y, theta).1,
    )?;
    let fluid = p.fluid.model()?;
    let disc = disc_mask(&grid, r0);
    let pv = disc_pore_volume(&grid, &disc);
    let n = grid.num_cells();
    let mut initial = SimState::uniform(n, p.initial_pressure, 1.0);
    for c in 0..n {
        let (x, y) = grid.center(c);
        let yp = rotate_coords(x, y, theta).1;
        if disc[c] && yp > p.band.0 && yp < p.band.1 {
            initial.s[c] = 0.0;
        }
    }
    let center = grid.locate(0.0, 0.0);
    let wells = WellSet {
        pressure_pin: Some(FixedPressure {
            cell: center,
            pressure: p.initial_pressure,
        }),
        ..Default::default()
    };
    let dt_nominal = schedule(cfl, p.dt_small, p.dt_large);
    Ok(Case {
        id: CaseId::Segregation,
        theta,
        grid,
        fluid,
        wells,
        initial,
        disc,
        disc_radius: r0,
        disc_pore_volume: pv,
        injection_rate: 0.0,
        time_unit: TimeUnit::Days,
        dt_nominal,
        t_end_nominal: p.t_end,
        dt: dt_nominal,
        t_end: p.t_end,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn producer_offsets() {
        let p = ThreeWellParams::default();
        let [a, b] = three_well_producers(&p, 0.0);
        assert_relative_eq!(a.0, -0.15, max_relative = 1e-14);
        assert_relative_eq!(b.0, 0.15, max_relative = 1e-14);
        assert_relative_eq!(a.1, -0.3 * math::cos(PI / 6.0), max_relative = 1e-14);
    }

    #[test]
    fn rotation_preserves_well_spacing() {
        let p = ThreeWellParams::default();
        let h = 1.0 / 51.0;
        let c0 = three_well_case(&p, 0.0, CflLevel::Small).unwrap();
        let c1 = three_well_case(&p, PI / 4.0, CflLevel::Small).unwrap();
        assert_ne!(c0.wells.producers[0].cell, c1.wells.producers[0].cell);
        let dist = |c: &Case, a: usize, b: usize| {
            let (x0, y0) = c.grid.center(a);
            let (x1, y1) = c.grid.center(b);
            math::sqrt((x0 - x1).powi(2) + (y0 - y1).powi(2))
        };
        let pair = |c: &Case| dist(c, c.wells.producers[0].cell, c.wells.producers[1].cell);
        let inj = |c: &Case| dist(c, c.wells.injectors[0].cell, c.wells.producers[0].cell);
        let diag = h * math::sqrt(2.0);
        assert!((pair(&c0) - pair(&c1)).abs() <= diag);
        assert!((inj(&c0) - inj(&c1)).abs() <= diag);
    }

    #[test]
    fn three_well_geometry() {
        let c = three_well_case(&ThreeWellParams::default(), 0.0, CflLevel::Small).unwrap();
        assert_relative_eq!(c.disc_radius, (1.0 - 1.0 / 51.0) / 2.0, max_relative = 1e-15);
        assert_relative_eq!(c.grid.dx, 1.0 / 51.0, max_relative = 1e-15);
        // nominal step converts back to the tabulated PVI step
        assert_relative_eq!(c.to_unit(c.dt), 0.092 / 70.0, max_relative = 1e-12);
        assert_eq!(c.wells.injectors[0].cell, c.grid.index(25, 25));
    }

    #[test]
    fn permeability_extremes() {
        let c = heterogeneous_case(&HeterogeneousParams::default(), 0.0, CflLevel::Small).unwrap();
        let (mut lo, mut hi) = (f64::MAX, 0.0f64);
        for (i, &k) in c.grid.perm.iter().enumerate() {
            if c.disc[i] {
                lo = lo.min(k);
                hi = hi.max(k);
            }
        }
        assert_relative_eq!(hi, 675.0, max_relative = 1e-12);
        assert!((lo - 30.7).abs() <= 0.02 * 30.7, "min {lo}");
        assert_relative_eq!(heterogeneous_permeability(200.0, 0.0, 0.0, 75.0), 675.0, max_relative = 1e-15);
    }

    #[test]
    fn bump_profile() {
        assert_relative_eq!(bump_height(20.0, 0.0, 10.0), 20.0, max_relative = 1e-15);
        assert!(bump_height(20.0, 10.0, 10.0).abs() < 1e-12);
        assert!(bump_height(20.0, 30.0, 10.0).abs() < 1e-12);
    }

    #[test]
    fn collar_surrounds_the_disc() {
        let c = heterogeneous_case(&HeterogeneousParams::default(), 0.0, CflLevel::Small).unwrap();
        let ring = &c.wells.dirichlet;
        assert!(!ring.is_empty());
        assert!(ring.iter().all(|d| c.disc[d.cell]));
        let center = c.grid.locate(0.0, 0.0);
        assert!(ring.iter().all(|d| d.cell != center));
    }

    #[test]
    fn segregation_initial_band_and_barriers() {
        let p = SegregationParams::default();
        let c = segregation_case(&p, 0.0, CflLevel::Small).unwrap();
        let filled = c.initial.s.iter().zip(&c.disc).filter(|(s, d)| **d && **s == 0.0).count();
        let in_disc = c.disc.iter().filter(|d| **d).count();
        // circular segment between y = -r0 and y = -45 over the disc area
        let r = c.disc_radius;
        let seg = |h: f64| r * r * libm::acos((r - h) / r) - (r - h) * math::sqrt(2.0 * r * h - h * h);
        let frac = seg(r - 45.0) / (PI * r * r);
        assert!((filled as f64 / in_disc as f64 - frac).abs() < 0.01);
        // at theta = 0 every barrier cell row is a full row segment
        for j in 0..c.grid.ny {
            let (_, y) = c.grid.center(c.grid.index(50, j));
            let hit = p.barriers.iter().any(|b| (y - b.y).abs() < b.half_thickness);
            let lowk = (0..c.grid.nx).any(|i| c.disc[c.grid.index(i, j)] && c.grid.perm[c.grid.index(i, j)] < 1.0);
            assert_eq!(hit, lowk, "row {j}");
        }
    }

    #[test]
    fn segregation_tilt() {
        let c = segregation_case(&SegregationParams::default(), 0.0, CflLevel::Small).unwrap();
        let a = c.grid.index(40, 40);
        let b = c.grid.index(40, 41);
        assert_relative_eq!(c.grid.depth[a] - c.grid.depth[b], c.grid.dy * math::sin(PI / 3.0), max_relative = 1e-12);
        assert_eq!(c.grid.depth[a], c.grid.depth[c.grid.index(41, 40)]);
    }

    #[test]
    fn builders_are_deterministic() {
        for id in [CaseId::ThreeWell, CaseId::Heterogeneous, CaseId::Segregation] {
            let s = CaseSpec::new(id, PI / 8.0, CflLevel::Large).with_resolution(25);
            let a = build_case(&s).unwrap();
            let b = build_case(&s).unwrap();
            assert_eq!(a.grid, b.grid);
            assert_eq!(a.wells, b.wells);
            assert_eq!(a.initial, b.initial);
        }
    }

    #[test]
    fn case_depths_avoid_doubly_aligned_regions() {
        for id in [CaseId::ThreeWell, CaseId::Heterogeneous, CaseId::Segregation] {
            for theta in [0.0, PI / 8.0, PI / 4.0, 0.4] {
                let c = build_case(&CaseSpec::new(id, theta, CflLevel::Small).with_resolution(31)).unwrap();
                let dual = DualGrid::build(&c.grid).unwrap();
                let bad = dual.regions.iter().filter(|r| crate::verify::sampling::doubly_aligned(&r.half_dz)).count();
                assert_eq!(bad, 0, "{id:?} {theta}");
            }
        }
    }

    #[test]
    fn invalid_specs() {
        let s = CaseSpec::new(CaseId::ThreeWell, 2.0 * PI, CflLevel::Small);
        assert!(build_case(&s).is_err());
        let s = CaseSpec::new(CaseId::ThreeWell, 0.0, CflLevel::Small).with_resolution(5);
        assert!(build_case(&s).is_err());
    }
}
