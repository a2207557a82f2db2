//! Sparse LU with a fixed sparsity pattern; the symbolic analysis is
//! computed once and reused for every numeric factorization.

use faer::linalg::solvers::Solve;
use faer::sparse::linalg::solvers::{Lu, SymbolicLu};
use faer::sparse::{Argsort, Pair, SparseColMat, SymbolicSparseColMat};
use faer::Col;

use crate::error::{Error, Result};

pub struct SparsePattern {
    n: usize,
    len: usize,
    symbolic: SymbolicSparseColMat<usize>,
    argsort: Argsort<usize>,
    lu: Option<SymbolicLu<usize>>,
}

impl SparsePattern {
    /// Square pattern from `(row, column)` pairs; repeated pairs are summed.
    pub fn new(n: usize, pairs: &[(usize, usize)]) -> Result<Self> {
        let idx: Vec<Pair<usize, usize>> = pairs.iter().map(|&(r, c)| Pair::new(r, c)).collect();
        let (symbolic, argsort) = SymbolicSparseColMat::try_new_from_indices(n, n, &idx)
            .map_err(|e| Error::Linear(format!("{e:?}")))?;
        Ok(Self {
            n,
            len: pairs.len(),
            symbolic,
            argsort,
            lu: None,
        })
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    /// Numeric LU of the matrix with entries `values` (one per input pair).
    pub fn factor(&mut self, values: &[f64]) -> Result<Factor> {
        if values.len() != self.len {
            return Err(Error::Linear(format!(
                "expected {} values, got {}",
                self.len,
                values.len()
            )));
        }
        let mat = SparseColMat::new_from_argsort(self.symbolic.clone(), &self.argsort, values)
            .map_err(|e| Error::Linear(format!("{e:?}")))?;
        if self.lu.is_none() {
            self.lu = Some(
                SymbolicLu::try_new(mat.symbolic()).map_err(|e| Error::Linear(format!("{e:?}")))?,
            );
        }
        let symbolic = self.lu.clone().expect("symbolic factorization present");
        let lu = Lu::try_new_with_symbolic(symbolic, mat.as_ref())
            .map_err(|e| Error::Linear(format!("{e:?}")))?;
        Ok(Factor { lu, n: self.n })
    }
}

pub struct Factor {
    lu: Lu<usize, f64>,
    n: usize,
}

impl Factor {
    pub fn solve(&self, rhs: &[f64]) -> Result<Vec<f64>> {
        let b = Col::<f64>::from_fn(self.n, |i| rhs[i]);
        let x = self.lu.solve(&b);
        let out: Vec<f64> = x.iter().copied().collect();
        if out.iter().any(|v| !v.is_finite()) {
            return Err(Error::Linear("singular or ill-conditioned matrix".into()));
        }
        Ok(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn solves_small_system_with_duplicates() {
        // [[4, 1], [2, 3]] with the (0, 0) entry split in two.
        let pairs = [(0, 0), (0, 1), (1, 0), (1, 1), (0, 0)];
        let mut p = SparsePattern::new(2, &pairs).unwrap();
        let f = p.factor(&[3.0, 1.0, 2.0, 3.0, 1.0]).unwrap();
        let x = f.solve(&[5.0, 5.0]).unwrap();
        assert!((x[0] - 1.0).abs() < 1e-14 && (x[1] - 1.0).abs() < 1e-14);
        let g = p.factor(&[1.0, 0.0, 0.0, 2.0, 1.0]).unwrap();
        let y = g.solve(&[2.0, 2.0]).unwrap();
        assert!((y[0] - 1.0).abs() < 1e-14 && (y[1] - 1.0).abs() < 1e-14);
    }
}
