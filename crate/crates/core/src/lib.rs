//! Fully implicit finite-volume simulation of incompressible two-phase
//! Darcy flow with buoyancy on 2D Cartesian grids.
//!
//! The crate is `no_std` with `alloc`. It provides fluid properties, the
//! primal and dual grids, the four flux discretizations (1D-PPU, 1D-IHU,
//! MultiD-PPU, MultiD-IHU), residual and Jacobian assembly with a damped
//! Newton solver, builders for the benchmark cases and property checks.

#![no_std]

extern crate alloc;
#[cfg(test)]
extern crate std;

mod math;

pub mod fluid;
pub mod flux;
pub mod grid;
pub mod solver;
pub mod cases;
pub mod verify;
