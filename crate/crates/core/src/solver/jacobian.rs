//! Block-sparse Jacobian with a fixed nine-point cell pattern.
//!
//! Unknowns are interleaved per cell as `(p_i, S_i)` and equations as
//! `(pressure, wetting transport)`, so each cell pair owns a 2x2 block.

use alloc::vec::Vec;

use crate::grid::{CartesianGrid, DualGrid};

/// Row-compressed cell adjacency: every pair of cells that share an
/// interaction region, including the diagonal.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BlockPattern {
    pub n: usize,
    pub row_ptr: Vec<usize>,
    pub cols: Vec<usize>,
}

impl BlockPattern {
    pub fn nine_point(grid: &CartesianGrid) -> Self {
        let (nx, ny) = (grid.nx as isize, grid.ny as isize);
        let n = grid.num_cells();
        let mut row_ptr = Vec::with_capacity(n + 1);
        let mut cols = Vec::with_capacity(9 * n);
        row_ptr.push(0);
        for cell in 0..n {
            let (i, j) = grid.ij(cell);
            for dj in -1..=1isize {
                for di in -1..=1isize {
                    let (a, b) = (i as isize + di, j as isize + dj);
                    if a >= 0 && b >= 0 && a < nx && b < ny {
                        cols.push(grid.index(a as usize, b as usize));
                    }
                }
            }
            row_ptr.push(cols.len());
        }
        Self { n, row_ptr, cols }
    }

    /// Slot of block `(row, col)`, if present.
    pub fn find(&self, row: usize, col: usize) -> Option<usize> {
        let lo = self.row_ptr[row];
        let hi = self.row_ptr[row + 1];
        self.cols[lo..hi].binary_search(&col).ok().map(|o| lo + o)
    }

    /// Slots `[a][b]` of every vertex pair of every region.
    pub fn region_slots(&self, dual: &DualGrid) -> Vec<[[usize; 4]; 4]> {
        dual.regions
            .iter()
            .map(|r| {
                let mut s = [[0; 4]; 4];
                for a in 0..4 {
                    for b in 0..4 {
                        s[a][b] = self
                            .find(r.vertex_cells[a], r.vertex_cells[b])
                            .expect("region cells are nine-point neighbours");
                    }
                }
                s
            })
            .collect()
    }

    pub fn diagonal_slots(&self) -> Vec<usize> {
        (0..self.n).map(|i| self.find(i, i).expect("diagonal present")).collect()
    }

    /// Half-bandwidth of the scalar matrix in interleaved ordering.
    pub fn scalar_bandwidth(&self) -> usize {
        let mut bw = 1;
        for row in 0..self.n {
            for &c in &self.cols[self.row_ptr[row]..self.row_ptr[row + 1]] {
                bw = bw.max(2 * row.abs_diff(c) + 1);
            }
        }
        bw
    }
}

/// Scalar dimension `2 n` matrix stored as 2x2 blocks `[[dp, dS]; 2]`
/// indexed `[equation][unknown]`.
#[derive(Debug, Clone, PartialEq)]
pub struct Jacobian {
    pub pattern: BlockPattern,
    pub blocks: Vec<[[f64; 2]; 2]>,
}

impl Jacobian {
    pub fn zeros(pattern: BlockPattern) -> Self {
        let nnz = pattern.cols.len();
        Self {
            pattern,
            blocks: alloc::vec![[[0.0; 2]; 2]; nnz],
        }
    }

    pub fn clear(&mut self) {
        self.blocks.iter_mut().for_each(|b| *b = [[0.0; 2]; 2]);
    }

    #[inline]
    pub fn dim(&self) -> usize {
        2 * self.pattern.n
    }

    /// `(row, col, value)` over every stored scalar entry, zeros included, so
    /// the structure is identical between assemblies.
    pub fn triplets(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        (0..self.pattern.n).flat_map(move |row| {
            (self.pattern.row_ptr[row]..self.pattern.row_ptr[row + 1]).flat_map(move |slot| {
                let col = self.pattern.cols[slot];
                let b = self.blocks[slot];
                (0..4).map(move |e| (2 * row + e / 2, 2 * col + e % 2, b[e / 2][e % 2]))
            })
        })
    }

    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        let mut y = alloc::vec![0.0; self.dim()];
        for (r, c, v) in self.triplets() {
            y[r] += v * x[c];
        }
        y
    }

    /// Dense row-major copy, for small test problems.
    pub fn to_dense(&self) -> Vec<Vec<f64>> {
        let n = self.dim();
        let mut m = alloc::vec![alloc::vec![0.0; n]; n];
        for (r, c, v) in self.triplets() {
            m[r][c] += v;
        }
        m
    }
}
