//! Direct linear solvers for the Newton system.

use alloc::vec::Vec;

use super::jacobian::Jacobian;
use super::SolverError;
use crate::math;

pub trait LinearSolver {
    /// Solves `J x = rhs`.
    fn solve(&mut self, jac: &Jacobian, rhs: &[f64]) -> Result<Vec<f64>, SolverError>;
}

/// Banded LU with partial pivoting. The interleaved nine-point structure
/// has half-bandwidth `2 (nx + 1) + 1`, which keeps this usable on the
/// desk-scale grids.
#[derive(Debug, Default, Clone)]
pub struct BandedLu {
    band: Vec<f64>,
    piv: Vec<usize>,
}

impl BandedLu {
    pub fn new() -> Self {
        Self::default()
    }
}

impl LinearSolver for BandedLu {
    fn solve(&mut self, jac: &Jacobian, rhs: &[f64]) -> Result<Vec<f64>, SolverError> {
        let n = jac.dim();
        if rhs.len() != n {
            return Err(SolverError::DimensionMismatch {
                expected: n,
                got: rhs.len(),
            });
        }
        let kl = jac.pattern.scalar_bandwidth();
        let ku = kl;
        let w = 2 * kl + ku + 1;
        self.band.clear();
        self.band.resize(n * w, 0.0);
        let at = |i: usize, j: usize| i * w + (j + kl - i);
        for (r, c, v) in jac.triplets() {
            self.band[at(r, c)] += v;
        }
        self.piv.clear();
        self.piv.resize(n, 0);
        let scale = self.band.iter().fold(0.0f64, |m, v| m.max(math::abs(*v)));
        for k in 0..n {
            let last = (k + kl).min(n - 1);
            let mut p = k;
            let mut best = math::abs(self.band[at(k, k)]);
            for r in k + 1..=last {
                let v = math::abs(self.band[at(r, k)]);
                if v > best {
                    best = v;
                    p = r;
                }
            }
            if !(best > scale * 1e-300) {
                return Err(SolverError::SingularMatrix { pivot: k });
            }
            self.piv[k] = p;
            let jmax = (k + kl + ku).min(n - 1);
            if p != k {
                for j in k..=jmax {
                    self.band.swap(at(k, j), at(p, j));
                }
            }
            let d = self.band[at(k, k)];
            for r in k + 1..=last {
                let l = self.band[at(r, k)] / d;
                if l == 0.0 {
                    continue;
                }
                self.band[at(r, k)] = l;
                for j in k + 1..=jmax {
                    let u = self.band[at(k, j)];
                    if u != 0.0 {
                        self.band[at(r, j)] -= l * u;
                    }
                }
            }
        }
        let mut x = rhs.to_vec();
        for k in 0..n {
            x.swap(k, self.piv[k]);
            let xk = x[k];
            if xk != 0.0 {
                for r in k + 1..=(k + kl).min(n - 1) {
                    x[r] -= self.band[at(r, k)] * xk;
                }
            }
        }
        for k in (0..n).rev() {
            let mut acc = x[k];
            for j in k + 1..=(k + kl + ku).min(n - 1) {
                acc -= self.band[at(k, j)] * x[j];
            }
            x[k] = acc / self.band[at(k, k)];
        }
        Ok(x)
    }
}

/// Dense Gaussian elimination with partial pivoting.
pub fn dense_solve(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Result<Vec<f64>, SolverError> {
    let n = b.len();
    for k in 0..n {
        let p = (k..n)
            .max_by(|&i, &j| math::abs(a[i][k]).total_cmp(&math::abs(a[j][k])))
            .unwrap_or(k);
        if a[p][k] == 0.0 {
            return Err(SolverError::SingularMatrix { pivot: k });
        }
        a.swap(k, p);
        b.swap(k, p);
        for r in k + 1..n {
            let l = a[r][k] / a[k][k];
            if l == 0.0 {
                continue;
            }
            for j in k..n {
                a[r][j] -= l * a[k][j];
            }
            b[r] -= l * b[k];
        }
    }
    let mut x = alloc::vec![0.0; n];
    for k in (0..n).rev() {
        let s: f64 = (k + 1..n).map(|j| a[k][j] * x[j]).sum();
        x[k] = (b[k] - s) / a[k][k];
    }
    Ok(x)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{CartesianGrid, GridSpec};
    use crate::solver::jacobian::BlockPattern;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn jac(n: usize) -> Jacobian {
        let g = CartesianGrid::build(GridSpec::square(n, 1.0), |_, _| 1.0, |_, _| 0.2, |_, _| 0.0).unwrap();
        Jacobian::zeros(BlockPattern::nine_point(&g))
    }

    #[test]
    fn identity_returns_rhs() {
        let mut j = jac(4);
        for s in j.pattern.diagonal_slots() {
            j.blocks[s] = [[1.0, 0.0], [0.0, 1.0]];
        }
        let rhs: Vec<f64> = (0..32).map(|i| i as f64 - 7.5).collect();
        assert_eq!(BandedLu::new().solve(&j, &rhs).unwrap(), rhs);
    }

    #[test]
    fn random_shifted_matrix_matches_dense_oracle() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let mut j = jac(5);
        for b in j.blocks.iter_mut() {
            for r in b.iter_mut() {
                for v in r.iter_mut() {
                    *v = rng.gen_range(-1.0..1.0);
                }
            }
        }
        // pivoting is exercised: no shift on half the diagonal entries
        for (i, s) in j.pattern.diagonal_slots().into_iter().enumerate() {
            if i % 2 == 0 {
                j.blocks[s][0][0] += 12.0;
                j.blocks[s][1][1] += 12.0;
            }
        }
        let rhs: Vec<f64> = (0..j.dim()).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let x = BandedLu::new().solve(&j, &rhs).unwrap();
        let y = dense_solve(j.to_dense(), rhs.clone()).unwrap();
        for (a, b) in x.iter().zip(&y) {
            assert!((a - b).abs() < 1e-10 * b.abs().max(1.0));
        }
        let r = j.mul_vec(&x);
        let rn: f64 = r.iter().zip(&rhs).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        assert!(rn < 1e-12);
    }

    #[test]
    fn singular_is_reported() {
        let j = jac(3);
        let rhs = alloc::vec![1.0; 18];
        assert!(matches!(BandedLu::new().solve(&j, &rhs), Err(SolverError::SingularMatrix { .. })));
    }
}
