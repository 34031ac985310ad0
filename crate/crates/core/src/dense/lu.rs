use super::DenseMatrix;
use crate::error::{Error, Result};

/// Pivots below this fraction of the matrix infinity norm count as singular.
const PIVOT_TOL: f64 = 1e-14;

/// LU factorization with partial pivoting, `P M = L U`.
#[derive(Debug, Clone)]
pub struct Lu {
    lu: DenseMatrix,
    perm: Vec<usize>,
    sign: f64,
}

impl Lu {
    pub fn factor(m: &DenseMatrix, context: &'static str) -> Result<Lu> {
        if !m.is_square() {
            return Err(Error::DimensionMismatch {
                context,
                expected: m.rows(),
                found: m.cols(),
            });
        }
        if !m.all_finite() {
            return Err(Error::NonFinite(context));
        }
        let n = m.rows();
        let threshold = PIVOT_TOL * m.norm_inf();
        let mut lu = m.clone();
        let mut perm: Vec<usize> = (0..n).collect();
        let mut sign = 1.0;
        for k in 0..n {
            let p = (k..n)
                .max_by(|&a, &b| lu[(a, k)].abs().total_cmp(&lu[(b, k)].abs()))
                .expect("non-empty range");
            if lu[(p, k)].abs() <= threshold || lu[(p, k)] == 0.0 {
                return Err(Error::Singular(context));
            }
            if p != k {
                for j in 0..n {
                    let t = lu[(k, j)];
                    lu[(k, j)] = lu[(p, j)];
                    lu[(p, j)] = t;
                }
                perm.swap(k, p);
                sign = -sign;
            }
            let pivot = lu[(k, k)];
            for i in k + 1..n {
                let l = lu[(i, k)] / pivot;
                lu[(i, k)] = l;
                if l != 0.0 {
                    for j in k + 1..n {
                        lu[(i, j)] -= l * lu[(k, j)];
                    }
                }
            }
        }
        Ok(Lu { lu, perm, sign })
    }

    pub fn order(&self) -> usize {
        self.perm.len()
    }

    pub fn solve_vec(&self, b: &[f64]) -> Vec<f64> {
        let n = self.order();
        assert_eq!(b.len(), n, "Lu::solve_vec: length mismatch");
        let mut x: Vec<f64> = self.perm.iter().map(|&p| b[p]).collect();
        for i in 0..n {
            let s: f64 = (0..i).map(|k| self.lu[(i, k)] * x[k]).sum();
            x[i] -= s;
        }
        for i in (0..n).rev() {
            let s: f64 = (i + 1..n).map(|k| self.lu[(i, k)] * x[k]).sum();
            x[i] = (x[i] - s) / self.lu[(i, i)];
        }
        x
    }

    pub fn solve(&self, rhs: &DenseMatrix) -> Result<DenseMatrix> {
        if rhs.rows() != self.order() {
            return Err(Error::DimensionMismatch {
                context: "Lu::solve",
                expected: self.order(),
                found: rhs.rows(),
            });
        }
        let cols: Vec<Vec<f64>> = (0..rhs.cols())
            .map(|j| self.solve_vec(&rhs.column(j)))
            .collect();
        Ok(DenseMatrix::from_fn(rhs.rows(), rhs.cols(), |i, j| {
            cols[j][i]
        }))
    }

    pub fn inverse(&self) -> DenseMatrix {
        self.solve(&DenseMatrix::identity(self.order()))
            .expect("identity has matching order")
    }

    /// `(sign, log|det|)`
    pub fn log_det(&self) -> (f64, f64) {
        let mut sign = self.sign;
        let mut log = 0.0;
        for i in 0..self.order() {
            let u = self.lu[(i, i)];
            if u < 0.0 {
                sign = -sign;
            }
            log += u.abs().ln();
        }
        (sign, log)
    }
}

/// Solves `M X = RHS` for a small square `M`.
pub fn small_solve(m: &DenseMatrix, rhs: &DenseMatrix) -> Result<DenseMatrix> {
    Lu::factor(m, "small_solve")?.solve(rhs)
}
