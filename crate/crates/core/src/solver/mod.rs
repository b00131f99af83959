//! Fully implicit residual and Jacobian assembly, damped Newton iteration
//! and time stepping with step chopping.

pub mod assemble;
pub mod jacobian;
pub mod linear;
pub mod newton;

use alloc::vec::Vec;
use thiserror::Error;

use crate::fluid::FluidModel;
use crate::flux::{FluxError, SchemeConfig};
use crate::grid::{CartesianGrid, DualGrid, GridError};

pub use assemble::{assemble, Assembly, PhaseRates};
pub use jacobian::{BlockPattern, Jacobian};
pub use linear::{dense_solve, BandedLu, LinearSolver};
pub use newton::{advance, newton_solve, AdvanceSummary, NewtonOutcome, StepLog};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SolverError {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("singular linear system at pivot {pivot}")]
    SingularMatrix { pivot: usize },
    #[error("linear solver failed: {0}")]
    LinearSolver(alloc::string::String),
    #[error("time step fell below {min_dt} at t = {t}")]
    TimeStepTooSmall { t: f64, min_dt: f64 },
    #[error("invalid Newton configuration: {0}")]
    InvalidConfig(&'static str),
    #[error("invalid well: {0}")]
    InvalidWell(&'static str),
    #[error(transparent)]
    Flux(#[from] FluxError),
    #[error(transparent)]
    Grid(#[from] GridError),
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct SimState {
    pub p: Vec<f64>,
    pub s: Vec<f64>,
}

impl SimState {
    pub fn uniform(n: usize, p: f64, s: f64) -> Self {
        Self {
            p: alloc::vec![p; n],
            s: alloc::vec![s; n],
        }
    }

    pub fn len(&self) -> usize {
        self.p.len()
    }

    pub fn is_empty(&self) -> bool {
        self.p.is_empty()
    }

    /// Wetting volume `sum phi V S`.
    pub fn wetting_volume(&self, grid: &CartesianGrid) -> f64 {
        self.s.iter().enumerate().map(|(i, s)| grid.pore_volume(i) * s).sum()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(default, deny_unknown_fields))]
pub struct NewtonConfig {
    pub max_iters: usize,
    pub ds_max: f64,
    pub tol: f64,
    /// Nominal time step [day].
    pub dt: f64,
    pub chop_factor: f64,
    /// Abort once the step falls below this fraction of `dt`.
    pub min_dt_fraction: f64,
}

impl Default for NewtonConfig {
    fn default() -> Self {
        Self {
            max_iters: 50,
            ds_max: 0.2,
            tol: 1e-8,
            dt: 1.0,
            chop_factor: 0.5,
            min_dt_fraction: 1e-6,
        }
    }
}

impl NewtonConfig {
    pub fn validate(&self) -> Result<(), SolverError> {
        if self.max_iters == 0 {
            return Err(SolverError::InvalidConfig("max_iters must be positive"));
        }
        if !(self.ds_max > 0.0 && self.ds_max <= 1.0) {
            return Err(SolverError::InvalidConfig("ds_max must lie in (0, 1]"));
        }
        if !(self.tol > 0.0) || !(self.dt > 0.0) {
            return Err(SolverError::InvalidConfig("tol and dt must be positive"));
        }
        if !(self.chop_factor > 0.0 && self.chop_factor < 1.0) {
            return Err(SolverError::InvalidConfig("chop_factor must lie in (0, 1)"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Injector {
    pub cell: usize,
    /// Wetting-phase volumetric rate [ft^3/day].
    pub rate: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Producer {
    pub cell: usize,
    pub bhp: f64,
    pub well_index: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FixedPressure {
    pub cell: usize,
    pub pressure: f64,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct WellSet {
    pub injectors: Vec<Injector>,
    pub producers: Vec<Producer>,
    /// Constant-pressure cells that exchange fluid with an outside reservoir.
    pub dirichlet: Vec<FixedPressure>,
    /// Closed systems fix the pressure level by replacing one pressure
    /// equation with `p = value`.
    pub pressure_pin: Option<FixedPressure>,
}

impl WellSet {
    pub fn validate(&self, n: usize) -> Result<(), SolverError> {
        if self.injectors.iter().any(|w| !(w.rate >= 0.0)) {
            return Err(SolverError::InvalidWell("injection rate must be nonnegative"));
        }
        if self.producers.iter().any(|w| !(w.well_index > 0.0)) {
            return Err(SolverError::InvalidWell("well index must be positive"));
        }
        let cells = self
            .injectors
            .iter()
            .map(|w| w.cell)
            .chain(self.producers.iter().map(|w| w.cell))
            .chain(self.dirichlet.iter().map(|w| w.cell))
            .chain(self.pressure_pin.iter().map(|w| w.cell));
        for c in cells {
            if c >= n {
                return Err(SolverError::InvalidWell("cell index out of range"));
            }
        }
        Ok(())
    }
}

/// Role of a cell's pair of equations.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum CellRole {
    Interior,
    /// Pressure equation replaced by `p = value`.
    Pinned(f64),
    /// Pressure fixed and the net total flux supplied by the outside.
    Dirichlet(f64),
}

/// A discretized problem: grid, fluid, wells and scheme, plus the cached
/// Jacobian structure.
#[derive(Debug, Clone)]
pub struct Problem {
    pub grid: CartesianGrid,
    pub dual: DualGrid,
    pub fluid: FluidModel,
    pub wells: WellSet,
    pub scheme: SchemeConfig,
    pub roles: Vec<CellRole>,
    pub pattern: BlockPattern,
    pub region_slots: Vec<[[usize; 4]; 4]>,
    pub diag_slots: Vec<usize>,
}

impl Problem {
    pub fn new(grid: CartesianGrid, fluid: FluidModel, wells: WellSet, scheme: SchemeConfig) -> Result<Self, SolverError> {
        let n = grid.num_cells();
        wells.validate(n)?;
        fluid.validate().map_err(FluxError::from)?;
        let dual = DualGrid::build(&grid)?;
        let mut roles = alloc::vec![CellRole::Interior; n];
        for d in &wells.dirichlet {
            roles[d.cell] = CellRole::Dirichlet(d.pressure);
        }
        if let Some(pin) = wells.pressure_pin {
            roles[pin.cell] = CellRole::Pinned(pin.pressure);
        }
        let pattern = BlockPattern::nine_point(&grid);
        let region_slots = pattern.region_slots(&dual);
        let diag_slots = pattern.diagonal_slots();
        Ok(Self {
            grid,
            dual,
            fluid,
            wells,
            scheme,
            roles,
            pattern,
            region_slots,
            diag_slots,
        })
    }

    pub fn with_scheme(mut self, scheme: SchemeConfig) -> Self {
        self.scheme = scheme;
        self
    }

    #[inline]
    pub fn num_cells(&self) -> usize {
        self.grid.num_cells()
    }
}
