//! Symmetric eigensolver: Householder tridiagonalization + implicit QL.
//!
//! Eigenvectors are accumulated transposed (one eigenvector per row) so that
//! both phases touch contiguous memory.

use super::{DenseMatrix, SymTridiagonal};
use crate::error::{Error, Result};

const MAX_QL_SWEEPS: usize = 30;
const SYMMETRY_TOL: f64 = 1e-12;

/// Eigenvalues ascending; `vectors` holds the matching eigenvectors as columns.
#[derive(Debug, Clone)]
pub struct SymEigen {
    pub values: Vec<f64>,
    pub vectors: DenseMatrix,
}

impl SymEigen {
    /// `V f(Λ) V^T`, symmetrized.
    pub fn map(&self, f: impl Fn(f64) -> f64) -> DenseMatrix {
        let fl: Vec<f64> = self.values.iter().map(|&l| f(l)).collect();
        let scaled = self.vectors.scale_columns(&fl);
        scaled
            .matmul_transpose(&self.vectors)
            .expect("shapes agree")
            .symmetrized()
    }

    /// First column of `V f(Λ) V^T`, i.e. `f(T) e_1`.
    pub fn map_first_column(&self, f: impl Fn(f64) -> f64) -> Vec<f64> {
        let n = self.values.len();
        (0..n)
            .map(|i| {
                (0..n)
                    .map(|k| self.vectors[(i, k)] * f(self.values[k]) * self.vectors[(0, k)])
                    .sum()
            })
            .collect()
    }

    pub fn min(&self) -> f64 {
        self.values.first().copied().unwrap_or(f64::NAN)
    }

    pub fn max(&self) -> f64 {
        self.values.last().copied().unwrap_or(f64::NAN)
    }
}

pub trait Spectral {
    fn spectral(&self) -> Result<SymEigen>;
}

impl Spectral for DenseMatrix {
    fn spectral(&self) -> Result<SymEigen> {
        if !self.is_square() {
            return Err(Error::DimensionMismatch {
                context: "sym_eig",
                expected: self.rows(),
                found: self.cols(),
            });
        }
        if !self.all_finite() {
            return Err(Error::NonFinite("sym_eig input"));
        }
        if !self.is_symmetric(SYMMETRY_TOL) {
            return Err(Error::NotSymmetric);
        }
        let n = self.rows();
        if n == 0 {
            return Ok(SymEigen {
                values: vec![],
                vectors: DenseMatrix::zeros(0, 0),
            });
        }
        // symmetric, so the transposed working copy is the matrix itself
        let mut w = self.symmetrized().as_slice().to_vec();
        let mut d = vec![0.0; n];
        let mut e = vec![0.0; n];
        tridiagonalize(n, &mut w, &mut d, &mut e);
        // shift subdiagonal to e[i] = T[i+1][i]
        for i in 1..n {
            e[i - 1] = e[i];
        }
        e[n - 1] = 0.0;
        ql_implicit(n, &mut d, &mut e, Some(&mut w))?;
        Ok(finish(n, d, w))
    }
}

impl Spectral for SymTridiagonal {
    fn spectral(&self) -> Result<SymEigen> {
        let n = self.order();
        if self
            .diag
            .iter()
            .chain(&self.offdiag)
            .any(|v| !v.is_finite())
        {
            return Err(Error::NonFinite("sym_eig input"));
        }
        let mut d = self.diag.clone();
        let mut e = self.offdiag.clone();
        e.push(0.0);
        e.truncate(n);
        let mut w = DenseMatrix::identity(n).as_slice().to_vec();
        ql_implicit(n, &mut d, &mut e, Some(&mut w))?;
        Ok(finish(n, d, w))
    }
}

pub fn sym_eig<S: Spectral + ?Sized>(s: &S) -> Result<SymEigen> {
    s.spectral()
}

/// Sorts ascending and turns the row-wise eigenvectors into columns.
fn finish(n: usize, d: Vec<f64>, w: Vec<f64>) -> SymEigen {
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| d[a].total_cmp(&d[b]));
    let values = order.iter().map(|&k| d[k]).collect();
    let vectors = DenseMatrix::from_fn(n, n, |i, j| w[order[j] * n + i]);
    SymEigen { values, vectors }
}

/// Householder reduction. `w` holds the transpose of the working matrix
/// (element (r, c) at `w[c * n + r]`); on exit row `k` of `w` is column `k` of
/// the orthogonal transform, `d` the diagonal and `e[1..]` the subdiagonal.
fn tridiagonalize(n: usize, w: &mut [f64], d: &mut [f64], e: &mut [f64]) {
    let at = |r: usize, c: usize| c * n + r;
    for j in 0..n {
        d[j] = w[at(n - 1, j)];
    }
    for i in (1..n).rev() {
        let mut scale = 0.0;
        let mut h = 0.0;
        for k in 0..i {
            scale += d[k].abs();
        }
        if scale == 0.0 {
            e[i] = d[i - 1];
            for j in 0..i {
                d[j] = w[at(i - 1, j)];
                w[at(i, j)] = 0.0;
                w[at(j, i)] = 0.0;
            }
        } else {
            for k in 0..i {
                d[k] /= scale;
                h += d[k] * d[k];
            }
            let mut f = d[i - 1];
            let mut g = h.sqrt();
            if f > 0.0 {
                g = -g;
            }
            e[i] = scale * g;
            h -= f * g;
            d[i - 1] = f - g;
            for ej in e.iter_mut().take(i) {
                *ej = 0.0;
            }
            for j in 0..i {
                f = d[j];
                w[at(j, i)] = f;
                g = e[j] + w[at(j, j)] * f;
                let col = &w[j * n..j * n + i];
                for k in j + 1..i {
                    g += col[k] * d[k];
                    e[k] += col[k] * f;
                }
                e[j] = g;
            }
            f = 0.0;
            for j in 0..i {
                e[j] /= h;
                f += e[j] * d[j];
            }
            let hh = f / (h + h);
            for j in 0..i {
                e[j] -= hh * d[j];
            }
            for j in 0..i {
                f = d[j];
                g = e[j];
                let col = &mut w[j * n..j * n + i];
                for k in j..i {
                    col[k] -= f * e[k] + g * d[k];
                }
                d[j] = w[at(i - 1, j)];
                w[at(i, j)] = 0.0;
            }
        }
        d[i] = h;
    }
    // accumulate transformations
    for i in 0..n - 1 {
        w[at(n - 1, i)] = w[at(i, i)];
        w[at(i, i)] = 1.0;
        let h = d[i + 1];
        if h != 0.0 {
            for k in 0..=i {
                d[k] = w[at(k, i + 1)] / h;
            }
            for j in 0..=i {
                let (lo, hi) = w.split_at_mut((i + 1) * n);
                let src = &hi[..=i];
                let dst = &mut lo[j * n..j * n + i + 1];
                let g: f64 = src.iter().zip(dst.iter()).map(|(a, b)| a * b).sum();
                for k in 0..=i {
                    dst[k] -= g * d[k];
                }
            }
        }
        for k in 0..=i {
            w[at(k, i + 1)] = 0.0;
        }
    }
    for j in 0..n {
        d[j] = w[at(n - 1, j)];
        w[at(n - 1, j)] = 0.0;
    }
    w[at(n - 1, n - 1)] = 1.0;
    e[0] = 0.0;
}

/// Implicit QL on `tridiag(e, d, e)` with `e[i] = T[i+1][i]`, `e[n-1] = 0`.
/// Rotations are applied to rows of `z` when given.
fn ql_implicit(n: usize, d: &mut [f64], e: &mut [f64], mut z: Option<&mut [f64]>) -> Result<()> {
    let eps = f64::EPSILON;
    let mut f = 0.0;
    let mut tst1: f64 = 0.0;
    for l in 0..n {
        tst1 = tst1.max(d[l].abs() + e[l].abs());
        let mut m = l;
        while m < n {
            if e[m].abs() <= eps * tst1 {
                break;
            }
            m += 1;
        }
        if m > l {
            let mut sweeps = 0;
            loop {
                sweeps += 1;
                if sweeps > MAX_QL_SWEEPS {
                    return Err(Error::NoConvergence {
                        routine: "sym_eig",
                        iterations: MAX_QL_SWEEPS,
                    });
                }
                let mut g = d[l];
                let mut p = (d[l + 1] - g) / (2.0 * e[l]);
                let mut r = p.hypot(1.0);
                if p < 0.0 {
                    r = -r;
                }
                d[l] = e[l] / (p + r);
                d[l + 1] = e[l] * (p + r);
                let dl1 = d[l + 1];
                let mut h = g - d[l];
                for di in d.iter_mut().take(n).skip(l + 2) {
                    *di -= h;
                }
                f += h;

                p = d[m];
                let mut c = 1.0;
                let mut c2 = c;
                let mut c3 = c;
                let el1 = e[l + 1];
                let mut s = 0.0;
                let mut s2 = 0.0;
                for i in (l..m).rev() {
                    c3 = c2;
                    c2 = c;
                    s2 = s;
                    g = c * e[i];
                    h = c * p;
                    r = p.hypot(e[i]);
                    e[i + 1] = s * r;
                    s = e[i] / r;
                    c = p / r;
                    p = c * d[i] - s * g;
                    d[i + 1] = h + s * (c * g + s * d[i]);
                    if let Some(z) = z.as_deref_mut() {
                        let (lo, hi) = z.split_at_mut((i + 1) * n);
                        let zi = &mut lo[i * n..];
                        let zi1 = &mut hi[..n];
                        for k in 0..n {
                            let t = zi1[k];
                            zi1[k] = s * zi[k] + c * t;
                            zi[k] = c * zi[k] - s * t;
                        }
                    }
                }
                p = -s * s2 * c3 * el1 * e[l] / dl1;
                e[l] = s * p;
                d[l] = c * p;
                if e[l].abs() <= eps * tst1 {
                    break;
                }
            }
        }
        d[l] += f;
        e[l] = 0.0;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_symmetric(n: usize, seed: u64) -> DenseMatrix {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        DenseMatrix::from_fn(n, n, |_, _| rng.random::<f64>() - 0.5).symmetrized()
    }

    fn check_decomposition(a: &DenseMatrix, eig: &SymEigen, tol: f64) {
        let n = a.rows();
        let v = &eig.vectors;
        let vtv = v.transpose().matmul(v).unwrap();
        assert!(vtv.sub(&DenseMatrix::identity(n)).max_abs() < tol);
        let av = a.matmul(v).unwrap();
        let vl = v.scale_columns(&eig.values);
        assert!(av.sub(&vl).max_abs() < tol * a.max_abs().max(1.0));
        assert!(eig.values.windows(2).all(|w| w[0] <= w[1]));
    }

    #[test]
    fn diagonal_and_two_by_two() {
        let a = DenseMatrix::from_diag(&[3.0, 1.0, 2.0]);
        assert_eq!(sym_eig(&a).unwrap().values, vec![1.0, 2.0, 3.0]);
        let b = DenseMatrix::from_rows(&[vec![2.0, 1.0], vec![1.0, 2.0]]);
        let e = sym_eig(&b).unwrap();
        assert!((e.values[0] - 1.0).abs() < 1e-15 && (e.values[1] - 3.0).abs() < 1e-15);
    }

    #[test]
    fn random_matrices_decompose() {
        for (n, seed) in [(1, 1), (2, 2), (5, 3), (40, 4), (130, 5)] {
            let a = random_symmetric(n, seed);
            let eig = sym_eig(&a).unwrap();
            check_decomposition(&a, &eig, 1e-12);
            assert!((eig.values.iter().sum::<f64>() - a.trace()).abs() < 1e-11);
        }
    }

    #[test]
    fn lap1d_closed_form() {
        let n = 50;
        let t = SymTridiagonal::new(vec![2.0; n], vec![-1.0; n - 1]).unwrap();
        let from_tri = sym_eig(&t).unwrap();
        let from_dense = sym_eig(&t.to_dense()).unwrap();
        for k in 0..n {
            let exact = 2.0 - 2.0 * ((k + 1) as f64 * std::f64::consts::PI / (n + 1) as f64).cos();
            assert!((from_tri.values[k] - exact).abs() < 1e-13);
            assert!((from_dense.values[k] - exact).abs() < 1e-13);
        }
        check_decomposition(&t.to_dense(), &from_tri, 1e-12);
    }

    #[test]
    fn repeated_eigenvalues() {
        let a = DenseMatrix::identity(6).scaled(4.0);
        let e = sym_eig(&a).unwrap();
        assert!(e.values.iter().all(|&l| (l - 4.0).abs() < 1e-15));
        check_decomposition(&a, &e, 1e-14);
    }

    #[test]
    fn rejects_nonsymmetric() {
        let a = DenseMatrix::from_rows(&[vec![1.0, 2.0], vec![0.0, 1.0]]);
        assert!(matches!(sym_eig(&a), Err(Error::NotSymmetric)));
        let nan = DenseMatrix::from_rows(&[vec![f64::NAN]]);
        assert!(sym_eig(&nan).is_err());
    }

    #[test]
    fn map_and_first_column_agree() {
        let a = random_symmetric(8, 7);
        let eig = sym_eig(&a).unwrap();
        let full = eig.map(|l| l.exp());
        let first = eig.map_first_column(|l| l.exp());
        for i in 0..8 {
            assert!((full[(i, 0)] - first[i]).abs() < 1e-13);
        }
    }
}
