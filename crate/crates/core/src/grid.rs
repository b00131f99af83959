//! Cartesian primal grid and the dual grid of interaction regions.
//!
//! Cell `(i, j)` has flat index `j * nx + i`; `j = 0` is the row with the
//! smallest `y`. Depth `z` increases downward.
//!
//! An interaction region is the 2x2 block of cells around an interior
//! primal vertex. Its vertices are the four cell centers, numbered
//! counterclockwise from the bottom-left one, and half interface `k`
//! joins vertex `k` to vertex `k + 1 (mod 4)`. A positive flux at half
//! interface `k` runs from vertex `k` to vertex `k + 1`.

use alloc::vec::Vec;

use crate::math;

/// Field-unit Darcy constant: ft^3/day per (mD * ft * psi / cP).
pub const DARCY_CONSTANT: f64 = 1.127e-3 * 5.614_583;

/// Converts a density in lbm/ft^3 times a depth in ft into psi.
pub const GRAVITY_PSI: f64 = 1.0 / 144.0;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum GridError {
    #[error("invalid grid: {0}")]
    InvalidSpec(&'static str),
    #[error("non-positive permeability {perm:e} in cell {cell}")]
    DegeneratePermeability { cell: usize, perm: f64 },
    #[error("porosity {poro} outside (0, 1] in cell {cell}")]
    InvalidPorosity { cell: usize, poro: f64 },
    #[error("field has {got} values, grid has {expected} cells")]
    FieldLength { expected: usize, got: usize },
}

/// Extents and resolution of a rectangular grid.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridSpec {
    pub nx: usize,
    pub ny: usize,
    pub x_min: f64,
    pub x_max: f64,
    pub y_min: f64,
    pub y_max: f64,
    /// Out-of-plane thickness [ft].
    pub thickness: f64,
}

impl GridSpec {
    pub fn square(n: usize, half_width: f64) -> Self {
        Self {
            nx: n,
            ny: n,
            x_min: -half_width,
            x_max: half_width,
            y_min: -half_width,
            y_max: half_width,
            thickness: 1.0,
        }
    }

    fn validate(&self) -> Result<(), GridError> {
        if self.nx < 2 || self.ny < 2 {
            return Err(GridError::InvalidSpec("nx and ny must be at least 2"));
        }
        if !(self.x_max > self.x_min && self.y_max > self.y_min) {
            return Err(GridError::InvalidSpec("extents must be positive"));
        }
        if !(self.thickness > 0.0) {
            return Err(GridError::InvalidSpec("thickness must be positive"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CartesianGrid {
    pub nx: usize,
    pub ny: usize,
    pub dx: f64,
    pub dy: f64,
    pub x_min: f64,
    pub y_min: f64,
    pub thickness: f64,
    /// Scalar permeability per cell [mD].
    pub perm: Vec<f64>,
    pub poro: Vec<f64>,
    /// Depth per cell [ft], positive downward.
    pub depth: Vec<f64>,
    /// Bulk volume per cell [ft^3].
    pub cell_volume: Vec<f64>,
    /// Multiplies geometric transmissibilities into flux units.
    pub darcy_constant: f64,
}

impl CartesianGrid {
    /// Samples the field closures at cell centers.
    pub fn build(
        spec: GridSpec,
        perm: impl Fn(f64, f64) -> f64,
        poro: impl Fn(f64, f64) -> f64,
        depth: impl Fn(f64, f64) -> f64,
    ) -> Result<Self, GridError> {
        spec.validate()?;
        let dx = (spec.x_max - spec.x_min) / spec.nx as f64;
        let dy = (spec.y_max - spec.y_min) / spec.ny as f64;
        let n = spec.nx * spec.ny;
        let mut k = Vec::with_capacity(n);
        let mut phi = Vec::with_capacity(n);
        let mut z = Vec::with_capacity(n);
        for j in 0..spec.ny {
            for i in 0..spec.nx {
                let x = spec.x_min + (i as f64 + 0.5) * dx;
                let y = spec.y_min + (j as f64 + 0.5) * dy;
                k.push(perm(x, y));
                phi.push(poro(x, y));
                z.push(depth(x, y));
            }
        }
        Self::from_fields(spec, k, phi, z)
    }

    /// Builds a grid from row-major per-cell arrays.
    pub fn from_fields(
        spec: GridSpec,
        perm: Vec<f64>,
        poro: Vec<f64>,
        depth: Vec<f64>,
    ) -> Result<Self, GridError> {
        spec.validate()?;
        let n = spec.nx * spec.ny;
        for f in [&perm, &poro, &depth] {
            if f.len() != n {
                return Err(GridError::FieldLength {
                    expected: n,
                    got: f.len(),
                });
            }
        }
        if let Some((cell, &p)) = perm.iter().enumerate().find(|(_, p)| !(**p > 0.0)) {
            return Err(GridError::DegeneratePermeability { cell, perm: p });
        }
        if let Some((cell, &p)) = poro.iter().enumerate().find(|(_, p)| !(**p > 0.0 && **p <= 1.0)) {
            return Err(GridError::InvalidPorosity { cell, poro: p });
        }
        let dx = (spec.x_max - spec.x_min) / spec.nx as f64;
        let dy = (spec.y_max - spec.y_min) / spec.ny as f64;
        Ok(Self {
            nx: spec.nx,
            ny: spec.ny,
            dx,
            dy,
            x_min: spec.x_min,
            y_min: spec.y_min,
            thickness: spec.thickness,
            perm,
            poro,
            depth,
            cell_volume: alloc::vec![dx * dy * spec.thickness; n],
            darcy_constant: DARCY_CONSTANT,
        })
    }

    /// Extents and resolution of this grid.
    pub fn spec(&self) -> GridSpec {
        GridSpec {
            nx: self.nx,
            ny: self.ny,
            x_min: self.x_min,
            x_max: self.x_min + self.nx as f64 * self.dx,
            y_min: self.y_min,
            y_max: self.y_min + self.ny as f64 * self.dy,
            thickness: self.thickness,
        }
    }

    #[inline]
    pub fn num_cells(&self) -> usize {
        self.nx * self.ny
    }

    #[inline]
    pub fn index(&self, i: usize, j: usize) -> usize {
        j * self.nx + i
    }

    #[inline]
    pub fn ij(&self, cell: usize) -> (usize, usize) {
        (cell % self.nx, cell / self.nx)
    }

    pub fn center(&self, cell: usize) -> (f64, f64) {
        let (i, j) = self.ij(cell);
        (
            self.x_min + (i as f64 + 0.5) * self.dx,
            self.y_min + (j as f64 + 0.5) * self.dy,
        )
    }

    /// Cell containing the point, clamped to the grid.
    pub fn locate(&self, x: f64, y: f64) -> usize {
        let fi = math::floor((x - self.x_min) / self.dx);
        let fj = math::floor((y - self.y_min) / self.dy);
        let i = (fi.max(0.0) as usize).min(self.nx - 1);
        let j = (fj.max(0.0) as usize).min(self.ny - 1);
        self.index(i, j)
    }

    #[inline]
    pub fn pore_volume(&self, cell: usize) -> f64 {
        self.cell_volume[cell] * self.poro[cell]
    }

    /// Cells sharing a face with `cell`.
    pub fn face_neighbors(&self, cell: usize) -> impl Iterator<Item = usize> + '_ {
        let (i, j) = self.ij(cell);
        let (i, j) = (i as isize, j as isize);
        [(-1, 0), (1, 0), (0, -1), (0, 1)].into_iter().filter_map(move |(di, dj)| {
            let (a, b) = (i + di, j + dj);
            (a >= 0 && b >= 0 && (a as usize) < self.nx && (b as usize) < self.ny)
                .then(|| self.index(a as usize, b as usize))
        })
    }
}

/// Two-point transmissibility of a half interface of length `l_half`
/// between cells whose centers are `d` apart: `2 l / (d (1/k_a + 1/k_b))`.
pub fn half_transmissibility(k_a: f64, k_b: f64, l_half: f64, d: f64) -> Result<f64, GridError> {
    if !(k_a > 0.0) {
        return Err(GridError::DegeneratePermeability { cell: 0, perm: k_a });
    }
    if !(k_b > 0.0) {
        return Err(GridError::DegeneratePermeability { cell: 1, perm: k_b });
    }
    Ok(2.0 * l_half / (d * (1.0 / k_a + 1.0 / k_b)))
}

/// Coordinates in a frame rotated counterclockwise by `theta`.
#[inline]
pub fn rotate_coords(x: f64, y: f64, theta: f64) -> (f64, f64) {
    let (s, c) = (math::sin(theta), math::cos(theta));
    (x * c + y * s, -x * s + y * c)
}

/// One 2x2 block of the dual grid.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InteractionRegion {
    /// Cells at vertices 0..4, counterclockwise from the bottom-left.
    pub vertex_cells: [usize; 4],
    /// Transmissibility of half interface `k`, in flux units.
    pub half_t: [f64; 4],
    /// `z[k+1] - z[k]`.
    pub half_dz: [f64; 4],
    /// Length of half interface `k` (in the plane).
    pub half_len: [f64; 4],
    /// Center-to-center distance across half interface `k`.
    pub dist: [f64; 4],
    /// Unit normal of half interface `k`, pointing from vertex `k` to `k+1`.
    pub normal: [(f64, f64); 4],
}

impl InteractionRegion {
    #[inline]
    pub const fn next(k: usize) -> usize {
        (k + 1) & 3
    }

    #[inline]
    pub const fn prev(k: usize) -> usize {
        (k + 3) & 3
    }

    /// Local vertex of `cell`, if it belongs to this region.
    pub fn local_vertex(&self, cell: usize) -> Option<usize> {
        self.vertex_cells.iter().position(|&c| c == cell)
    }
}

/// All interior interaction regions of a grid.
#[derive(Debug, Clone, PartialEq)]
pub struct DualGrid {
    pub regions: Vec<InteractionRegion>,
    /// Regions per row (`nx - 1`).
    pub rx: usize,
    /// Region rows (`ny - 1`).
    pub ry: usize,
}

impl DualGrid {
    pub fn build(grid: &CartesianGrid) -> Result<Self, GridError> {
        let (rx, ry) = (grid.nx - 1, grid.ny - 1);
        let mut regions = Vec::with_capacity(rx * ry);
        let (dx, dy) = (grid.dx, grid.dy);
        let half_len = [
            0.5 * dy * grid.thickness,
            0.5 * dx * grid.thickness,
            0.5 * dy * grid.thickness,
            0.5 * dx * grid.thickness,
        ];
        let dist = [dx, dy, dx, dy];
        let normal = [(1.0, 0.0), (0.0, 1.0), (-1.0, 0.0), (0.0, -1.0)];
        for j in 0..ry {
            for i in 0..rx {
                let cells = [
                    grid.index(i, j),
                    grid.index(i + 1, j),
                    grid.index(i + 1, j + 1),
                    grid.index(i, j + 1),
                ];
                let mut half_t = [0.0; 4];
                let mut half_dz = [0.0; 4];
                for k in 0..4 {
                    let (a, b) = (cells[k], cells[InteractionRegion::next(k)]);
                    half_t[k] = grid.darcy_constant
                        * half_transmissibility(grid.perm[a], grid.perm[b], half_len[k], dist[k])
                            .map_err(|_| GridError::DegeneratePermeability {
                                cell: if grid.perm[a] > 0.0 { b } else { a },
                                perm: grid.perm[a].min(grid.perm[b]),
                            })?;
                    half_dz[k] = grid.depth[b] - grid.depth[a];
                }
                regions.push(InteractionRegion {
                    vertex_cells: cells,
                    half_t,
                    half_dz,
                    half_len,
                    dist,
                    normal,
                });
            }
        }
        Ok(Self { regions, rx, ry })
    }

    #[inline]
    pub fn region_index(&self, i: usize, j: usize) -> usize {
        j * self.rx + i
    }

    /// `(region, local vertex)` pairs that contain `cell`.
    pub fn regions_of_cell(&self, grid: &CartesianGrid, cell: usize) -> Vec<(usize, usize)> {
        let (i, j) = grid.ij(cell);
        let mut out = Vec::with_capacity(4);
        // region (ri, rj) has lower-left cell (ri, rj)
        let cand = [(0isize, 0isize, 0usize), (-1, 0, 1), (-1, -1, 2), (0, -1, 3)];
        for (di, dj, local) in cand {
            let ri = i as isize + di;
            let rj = j as isize + dj;
            if ri >= 0 && rj >= 0 && (ri as usize) < self.rx && (rj as usize) < self.ry {
                out.push((self.region_index(ri as usize, rj as usize), local));
            }
        }
        out
    }

    /// Largest half-interface transmissibility touching `cell`.
    pub fn max_adjacent_transmissibility(&self, grid: &CartesianGrid, cell: usize) -> f64 {
        let mut best: f64 = 0.0;
        for (r, local) in self.regions_of_cell(grid, cell) {
            let reg = &self.regions[r];
            best = best
                .max(reg.half_t[local])
                .max(reg.half_t[InteractionRegion::prev(local)]);
        }
        best
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use core::f64::consts::PI;

    fn uniform(n: usize, h: f64) -> CartesianGrid {
        CartesianGrid::build(GridSpec::square(n, h), |_, _| 10.0, |_, _| 0.2, |_, y| y).unwrap()
    }

    #[test]
    fn uniform_fields_are_identical() {
        let g = uniform(5, 1.0);
        assert!(g.perm.iter().all(|&k| k == 10.0));
        assert!(g.cell_volume.iter().all(|&v| v == g.cell_volume[0]));
    }

    #[test]
    fn benchmark_grid_spacings() {
        let g = CartesianGrid::build(GridSpec::square(51, 0.5), |_, _| 1.0, |_, _| 0.2, |_, _| 0.0).unwrap();
        assert_relative_eq!(g.dx, 1.0 / 51.0, max_relative = 1e-15);
        assert_relative_eq!(g.dy, 1.0 / 51.0, max_relative = 1e-15);
        let g = CartesianGrid::build(GridSpec::square(101, 75.0), |_, _| 1.0, |_, _| 0.2, |_, _| 0.0).unwrap();
        assert_relative_eq!(g.dx, 150.0 / 101.0, max_relative = 1e-15);
    }

    #[test]
    fn invalid_specs_rejected() {
        let mut s = GridSpec::square(1, 1.0);
        assert!(CartesianGrid::build(s, |_, _| 1.0, |_, _| 0.2, |_, _| 0.0).is_err());
        s = GridSpec::square(4, 1.0);
        s.x_max = s.x_min;
        assert!(CartesianGrid::build(s, |_, _| 1.0, |_, _| 0.2, |_, _| 0.0).is_err());
        let s = GridSpec::square(4, 1.0);
        assert!(matches!(
            CartesianGrid::build(s, |_, _| 0.0, |_, _| 0.2, |_, _| 0.0),
            Err(GridError::DegeneratePermeability { .. })
        ));
        assert!(CartesianGrid::build(s, |_, _| 1.0, |_, _| 1.5, |_, _| 0.0).is_err());
    }

    #[test]
    fn single_region_on_2x2() {
        let g = uniform(2, 1.0);
        let d = DualGrid::build(&g).unwrap();
        assert_eq!(d.regions.len(), 1);
        assert_eq!(d.regions[0].vertex_cells, [0, 1, 3, 2]);
    }

    #[test]
    fn region_count_and_membership() {
        let g = uniform(51, 0.5);
        let d = DualGrid::build(&g).unwrap();
        assert_eq!(d.regions.len(), 2500);
        let mut count = alloc::vec![0usize; g.num_cells()];
        for r in &d.regions {
            for &c in &r.vertex_cells {
                count[c] += 1;
            }
        }
        for c in 0..g.num_cells() {
            let (i, j) = g.ij(c);
            let interior = i > 0 && j > 0 && i < g.nx - 1 && j < g.ny - 1;
            if interior {
                assert_eq!(count[c], 4);
            }
            assert_eq!(count[c], d.regions_of_cell(&g, c).len());
            for (r, local) in d.regions_of_cell(&g, c) {
                assert_eq!(d.regions[r].vertex_cells[local], c);
            }
        }
    }

    #[test]
    fn tpfa_values() {
        let h = 0.3;
        assert_relative_eq!(half_transmissibility(7.0, 7.0, h / 2.0, h).unwrap(), 3.5);
        let t = half_transmissibility(1e-300, 7.0, 0.5, 1.0).unwrap();
        assert!(t < 1e-299);
        let l = 0.5;
        let d = 1.0;
        let t = half_transmissibility(50.0, 5e-5, l, d).unwrap();
        assert_relative_eq!(t, l * 1e-4 / d, max_relative = 1e-5);
        assert!(half_transmissibility(0.0, 1.0, l, d).is_err());
        assert_eq!(
            half_transmissibility(3.0, 11.0, l, d).unwrap(),
            half_transmissibility(11.0, 3.0, l, d).unwrap()
        );
    }

    #[test]
    fn transmissibility_matches_across_regions() {
        let g = CartesianGrid::build(
            GridSpec::square(6, 1.0),
            |x, y| 1.0 + 10.0 * (x * x + 3.0 * y).abs(),
            |_, _| 0.2,
            |x, y| x * y,
        )
        .unwrap();
        let d = DualGrid::build(&g).unwrap();
        for rj in 0..d.ry {
            for ri in 0..d.rx {
                let r = &d.regions[d.region_index(ri, rj)];
                let s: f64 = r.half_dz.iter().sum();
                assert!(math::abs(s) < 1e-12);
                if rj + 1 < d.ry {
                    // upper neighbor: its half interface 0 splits the same face as our 2
                    let up = &d.regions[d.region_index(ri, rj + 1)];
                    assert_eq!(r.half_t[2], up.half_t[0]);
                }
                if ri + 1 < d.rx {
                    let right = &d.regions[d.region_index(ri + 1, rj)];
                    assert_eq!(r.half_t[1], right.half_t[3]);
                }
            }
        }
    }

    #[test]
    fn rotation() {
        assert_eq!(rotate_coords(0.3, -0.7, 0.0), (0.3, -0.7));
        let (x, y) = rotate_coords(1.0, 0.0, PI / 2.0);
        assert!(math::abs(x) < 1e-15 && math::abs(y + 1.0) < 1e-15);
        for &t in &[0.1, 0.7, 1.3, -2.0] {
            let (a, b) = rotate_coords(0.37, -1.2, t);
            let (c, d) = rotate_coords(a, b, -t);
            assert!(math::abs(c - 0.37) < 1e-14 && math::abs(d + 1.2) < 1e-14);
        }
    }

    #[test]
    fn locate_is_inverse_of_center() {
        let g = uniform(7, 2.0);
        for c in 0..g.num_cells() {
            let (x, y) = g.center(c);
            assert_eq!(g.locate(x, y), c);
        }
    }
}
