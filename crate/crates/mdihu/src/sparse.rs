//! Sparse LU for the Newton systems, reusing one symbolic factorization per
//! sparsity pattern.

use faer::linalg::solvers::Solve;
use faer::sparse::linalg::LuError;
use faer::sparse::{SparseColMatRef, SymbolicSparseColMatRef};
use faer::sparse::linalg::solvers::{Lu, SymbolicLu};
use faer::Mat;

use mdihu_core::solver::{Jacobian, LinearSolver, SolverError};

/// Compressed-column layout of a block pattern and the map from the
/// Jacobian's stored entries to it.
#[derive(Debug, Clone)]
struct CscLayout {
    dim: usize,
    col_ptr: Vec<usize>,
    row_idx: Vec<usize>,
    /// Position in the compressed arrays of each Jacobian triplet.
    slot: Vec<usize>,
}

impl CscLayout {
    fn new(jac: &Jacobian) -> Self {
        let dim = jac.dim();
        let triplets: Vec<(usize, usize)> = jac.triplets().map(|(r, c, _)| (r, c)).collect();
        let mut order: Vec<usize> = (0..triplets.len()).collect();
        order.sort_by_key(|&t| (triplets[t].1, triplets[t].0));
        let mut col_ptr = vec![0; dim + 1];
        let mut row_idx = Vec::with_capacity(order.len());
        let mut slot = vec![0; triplets.len()];
        for (pos, &t) in order.iter().enumerate() {
            let (r, c) = triplets[t];
            col_ptr[c + 1] += 1;
            row_idx.push(r);
            slot[t] = pos;
        }
        for c in 0..dim {
            col_ptr[c + 1] += col_ptr[c];
        }
        Self {
            dim,
            col_ptr,
            row_idx,
            slot,
        }
    }

    fn symbolic(&self) -> SymbolicSparseColMatRef<'_, usize> {
        SymbolicSparseColMatRef::new_checked(self.dim, self.dim, &self.col_ptr, None, &self.row_idx)
    }
}

/// Sparse LU with partial pivoting. The symbolic analysis is computed on
/// the first solve and reused while the pattern is unchanged.
#[derive(Debug, Default)]
pub struct SparseLu {
    layout: Option<CscLayout>,
    symbolic: Option<SymbolicLu<usize>>,
    values: Vec<f64>,
}

impl SparseLu {
    pub fn new() -> Self {
        Self::default()
    }

    fn prepare(&mut self, jac: &Jacobian) -> Result<(), SolverError> {
        let stale = self
            .layout
            .as_ref()
            .map_or(true, |l| l.dim != jac.dim() || l.slot.len() != jac.triplets().count());
        if stale {
            let layout = CscLayout::new(jac);
            let symbolic = SymbolicLu::try_new(layout.symbolic()).map_err(|e| SolverError::LinearSolver(format!("{e:?}")))?;
            self.values = vec![0.0; layout.row_idx.len()];
            self.layout = Some(layout);
            self.symbolic = Some(symbolic);
        }
        Ok(())
    }
}

impl LinearSolver for SparseLu {
    fn solve(&mut self, jac: &Jacobian, rhs: &[f64]) -> Result<Vec<f64>, SolverError> {
        if rhs.len() != jac.dim() {
            return Err(SolverError::DimensionMismatch {
                expected: jac.dim(),
                got: rhs.len(),
            });
        }
        self.prepare(jac)?;
        let (Some(layout), Some(symbolic)) = (&self.layout, &self.symbolic) else {
            unreachable!("prepare sets both");
        };
        for ((_, _, v), &pos) in jac.triplets().zip(&layout.slot) {
            self.values[pos] = v;
        }
        let mat = SparseColMatRef::new(layout.symbolic(), &self.values);
        let lu = Lu::try_new_with_symbolic(symbolic.clone(), mat).map_err(|e| match e {
            LuError::SymbolicSingular { index } => SolverError::SingularMatrix { pivot: index },
            LuError::Generic(g) => SolverError::LinearSolver(format!("{g:?}")),
        })?;
        let mut x = Mat::from_fn(rhs.len(), 1, |i, _| rhs[i]);
        lu.solve_in_place(x.as_mut());
        let out: Vec<f64> = (0..rhs.len()).map(|i| x[(i, 0)]).collect();
        if out.iter().any(|v| !v.is_finite()) {
            return Err(SolverError::SingularMatrix { pivot: 0 });
        }
        Ok(out)
    }
}
