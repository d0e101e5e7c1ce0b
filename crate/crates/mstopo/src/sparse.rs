//! Sparse symmetric positive-definite solves shared by the cell and macro analyses.

use crate::error::{Error, Result};
use faer::sparse::{SparseColMat, Triplet};
use std::sync::Once;

static INIT: Once = Once::new();

/// Forces single-threaded kernels inside the factorization so that repeated
/// runs produce bit-identical results. Coarse-grained parallelism (over cells,
/// fit restarts, ...) lives above this layer.
fn init_deterministic() {
    INIT.call_once(|| {
        faer::set_global_parallelism(faer::Par::Seq);
    });
}

/// A Cholesky factorization of a sparse SPD matrix, reusable across right-hand sides.
#[derive(Debug)]
pub(crate) struct SpdSolver {
    llt: faer::sparse::linalg::solvers::Llt<usize, f64>,
    n: usize,
}

impl SpdSolver {
    /// Assembles `A` from triplets (duplicates are summed) and factors it.
    ///
    /// Fails with [`Error::Mechanism`] when the matrix is structurally invalid
    /// or not positive definite.
    pub fn factor(n: usize, triplets: &[(usize, usize, f64)]) -> Result<Self> {
        init_deterministic();
        let entries: Vec<Triplet<usize, usize, f64>> = triplets
            .iter()
            .map(|&(r, c, v)| Triplet::new(r, c, v))
            .collect();
        let a = SparseColMat::<usize, f64>::try_new_from_triplets(n, n, &entries)
            .map_err(|_| Error::Mechanism)?;
        let llt = a
            .as_ref()
            .sp_cholesky(faer::Side::Lower)
            .map_err(|_| Error::Mechanism)?;
        Ok(Self { llt, n })
    }

    /// Solves `A x = rhs` for a single right-hand side.
    pub fn solve(&self, rhs: &[f64]) -> Vec<f64> {
        assert_eq!(rhs.len(), self.n, "right-hand side length mismatch");
        let b = faer::Mat::from_fn(self.n, 1, |i, _| rhs[i]);
        let x = faer::linalg::solvers::Solve::solve(&self.llt, &b);
        (0..self.n).map(|i| x[(i, 0)]).collect()
    }

    /// Solves `A X = B` column-wise for several right-hand sides at once.
    pub fn solve_many(&self, rhs: &[Vec<f64>]) -> Vec<Vec<f64>> {
        let k = rhs.len();
        for col in rhs {
            assert_eq!(col.len(), self.n, "right-hand side length mismatch");
        }
        let b = faer::Mat::from_fn(self.n, k, |i, j| rhs[j][i]);
        let x = faer::linalg::solvers::Solve::solve(&self.llt, &b);
        (0..k)
            .map(|j| (0..self.n).map(|i| x[(i, j)]).collect())
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn solves_a_small_spd_system() {
        // A = [[4, 1, 0], [1, 3, 1], [0, 1, 2]], x = [1, 2, 3] => b = A x.
        let triplets = vec![
            (0, 0, 4.0),
            (0, 1, 1.0),
            (1, 0, 1.0),
            (1, 1, 3.0),
            (1, 2, 1.0),
            (2, 1, 1.0),
            (2, 2, 2.0),
        ];
        let solver = SpdSolver::factor(3, &triplets).unwrap();
        let b = vec![6.0, 10.0, 8.0];
        let x = solver.solve(&b);
        for (got, want) in x.iter().zip([1.0, 2.0, 3.0]) {
            assert!((got - want).abs() < 1e-12, "{got} vs {want}");
        }
    }

    #[test]
    fn duplicate_triplets_are_summed() {
        // Diagonal 2+3 = 5 given twice.
        let triplets = vec![(0, 0, 2.0), (0, 0, 3.0)];
        let solver = SpdSolver::factor(1, &triplets).unwrap();
        let x = solver.solve(&[10.0]);
        assert!((x[0] - 2.0).abs() < 1e-14);
    }

    #[test]
    fn indefinite_matrix_is_rejected() {
        let triplets = vec![(0, 0, -1.0), (1, 1, 1.0)];
        let err = SpdSolver::factor(2, &triplets).unwrap_err();
        assert!(matches!(err, Error::Mechanism));
    }

    #[test]
    fn multi_rhs_matches_single_rhs() {
        let triplets = vec![(0, 0, 2.0), (1, 1, 5.0), (0, 1, 1.0), (1, 0, 1.0)];
        let solver = SpdSolver::factor(2, &triplets).unwrap();
        let b0 = vec![1.0, 0.0];
        let b1 = vec![0.0, 1.0];
        let xs = solver.solve_many(&[b0.clone(), b1.clone()]);
        assert_eq!(xs[0], solver.solve(&b0));
        assert_eq!(xs[1], solver.solve(&b1));
    }
}
