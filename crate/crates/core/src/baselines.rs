//! Reference computations: a dense spectral evaluation of `A # B` and a
//! Gauss-Chebyshev quadrature for `(A # B) v`.

use crate::dense::{sym_eig, DenseMatrix};
use crate::error::{Error, Result};
use crate::solvers::{solve_spd_pencil, CgConfig, PencilSpectrumBounds, SolveTotals};
use crate::sparse::SparseMatrix;
use crate::vector::{axpy, norm2, sub};

pub const DENSE_GUARD_ENV: &str = "GEOMEAN_DENSE_GUARD";
pub const DEFAULT_DENSE_GUARD: usize = 5000;

/// Largest order the dense oracle accepts; `GEOMEAN_DENSE_GUARD` overrides.
pub fn dense_guard() -> usize {
    std::env::var(DENSE_GUARD_ENV)
        .ok()
        .and_then(|s| s.trim().parse().ok())
        .unwrap_or(DEFAULT_DENSE_GUARD)
}

/// `A^{1/2} (A^{-1/2} B A^{-1/2})^{1/2} A^{1/2}` for sparse inputs.
pub fn dense_geomean(a: &SparseMatrix, b: &SparseMatrix) -> Result<DenseMatrix> {
    let limit = dense_guard();
    let n = a.n_rows();
    if n > limit {
        return Err(Error::DenseGuard { n, limit });
    }
    if b.n_rows() != n || !a.is_square() || !b.is_square() {
        return Err(Error::DimensionMismatch {
            context: "dense_geomean",
            expected: n,
            found: b.n_rows(),
        });
    }
    dense_geomean_of(&a.to_dense(), &b.to_dense())
}

/// Dense version of [`dense_geomean`], without the size guard.
pub fn dense_geomean_of(a: &DenseMatrix, b: &DenseMatrix) -> Result<DenseMatrix> {
    if a.rows() != b.rows() || !b.is_square() {
        return Err(Error::DimensionMismatch {
            context: "dense_geomean",
            expected: a.rows(),
            found: b.rows(),
        });
    }
    let ea = sym_eig(a)?;
    if ea.min() <= 0.0 {
        return Err(Error::NotPositiveDefinite {
            context: "dense_geomean: A",
            value: ea.min(),
        });
    }
    let a_half = ea.map(f64::sqrt);
    let a_inv_half = ea.map(|l| 1.0 / l.sqrt());
    let c = a_inv_half.matmul(b)?.matmul(&a_inv_half)?.symmetrized();
    let ec = sym_eig(&c)?;
    if ec.min() <= 0.0 {
        return Err(Error::NotPositiveDefinite {
            context: "dense_geomean: A^{-1/2} B A^{-1/2}",
            value: ec.min(),
        });
    }
    let c_half = ec.map(f64::sqrt);
    Ok(a_half.matmul(&c_half)?.matmul(&a_half)?.symmetrized())
}

/// Gauss-Chebyshev rule for `(1/pi) int_{-1}^{1} g(u) du / sqrt(1 - u^2)`.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadratureRule {
    pub nodes: Vec<f64>,
    /// Already divided by pi, i.e. `1/N` each.
    pub weights: Vec<f64>,
    /// `(lambda_min lambda_max)^{1/4}` of the pencil.
    pub scale: f64,
}

impl QuadratureRule {
    pub fn gauss_chebyshev(count: usize, bounds: &PencilSpectrumBounds) -> Result<Self> {
        if count == 0 {
            return Err(Error::InvalidSize("quadrature needs at least one node"));
        }
        if !(bounds.lambda_min > 0.0 && bounds.lambda_min <= bounds.lambda_max) {
            return Err(Error::InvalidParameter("invalid spectral bounds".into()));
        }
        let nodes = (1..=count)
            .map(|i| ((2 * i - 1) as f64 * std::f64::consts::PI / (2 * count) as f64).cos())
            .collect();
        Ok(QuadratureRule {
            nodes,
            weights: vec![1.0 / count as f64; count],
            scale: (bounds.lambda_min * bounds.lambda_max).powf(0.25),
        })
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }
}

/// `(c/N) A sum_i x_i` with `((1 - u_i^2) A + c^2 u_i^2 B) x_i = B v`.
/// Nodes `u` and `-u` give the same system, so each pair is solved once.
pub fn gauss_chebyshev_geomean(
    a: &SparseMatrix,
    b: &SparseMatrix,
    v: &[f64],
    count: usize,
    bounds: &PencilSpectrumBounds,
    cg: &CgConfig,
) -> Result<(Vec<f64>, SolveTotals)> {
    let rule = QuadratureRule::gauss_chebyshev(count, bounds)?;
    let c = rule.scale;
    let bv = b.matvec(v)?;
    let mut acc = vec![0.0; v.len()];
    let mut totals = SolveTotals::default();
    // nodes are symmetric: u_i = -u_{N+1-i}
    for i in 0..count.div_ceil(2) {
        let u = rule.nodes[i];
        let mirrored = i != count - 1 - i;
        let weight = rule.weights[i] * if mirrored { 2.0 } else { 1.0 };
        let (x, stats) = solve_spd_pencil(1.0 - u * u, a, c * c * u * u, b, &bv, cg)?;
        totals.record(&stats);
        axpy(weight, &x, &mut acc);
    }
    let mut out = a.matvec(&acc)?;
    crate::vector::scale(c, &mut out);
    Ok((out, totals))
}

/// `||x - x_ref|| / ||x_ref||`
pub fn relative_error(x: &[f64], x_ref: &[f64]) -> Result<f64> {
    if x.len() != x_ref.len() {
        return Err(Error::DimensionMismatch {
            context: "relative_error",
            expected: x_ref.len(),
            found: x.len(),
        });
    }
    let nr = norm2(x_ref);
    if nr == 0.0 {
        return Err(Error::ZeroReference);
    }
    Ok(norm2(&sub(x, x_ref)) / nr)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dense::sqrt_spd;
    use crate::sparse::random_spd;

    fn scalar(x: f64) -> SparseMatrix {
        SparseMatrix::diagonal(&[x]).unwrap()
    }

    fn bounds(a: f64, b: f64) -> PencilSpectrumBounds {
        PencilSpectrumBounds::new(a, b).unwrap()
    }

    #[test]
    fn dense_small_cases() {
        let g = dense_geomean(&scalar(4.0), &scalar(9.0)).unwrap();
        assert!((g[(0, 0)] - 6.0).abs() < 1e-14);
        let a = SparseMatrix::diagonal(&[1.0, 4.0]).unwrap();
        let b = SparseMatrix::diagonal(&[9.0, 16.0]).unwrap();
        let g = dense_geomean(&a, &b).unwrap();
        let expected = DenseMatrix::from_diag(&[3.0, 8.0]);
        assert!(g.sub(&expected).max_abs() < 1e-13);
    }

    #[test]
    fn dense_with_identity_is_square_root() {
        let b = random_spd(12, 4).unwrap();
        let g = dense_geomean(&SparseMatrix::identity(12), &b).unwrap();
        let root = sqrt_spd(&b.to_dense()).unwrap();
        assert!(g.sub(&root).max_abs() <= 1e-12 * root.max_abs());
    }

    #[test]
    fn dense_guard_applies() {
        // the guard is read per call; the default comfortably admits tiny inputs
        assert!(dense_guard() >= 1);
        let err = Error::DenseGuard { n: 10, limit: 5 };
        assert!(err.to_string().contains("guard"));
    }

    #[test]
    fn dense_rejects_indefinite() {
        let a = SparseMatrix::diagonal(&[1.0, -1.0]).unwrap();
        assert!(dense_geomean(&a, &SparseMatrix::identity(2)).is_err());
    }

    #[test]
    fn rule_is_symmetric() {
        let r = QuadratureRule::gauss_chebyshev(7, &bounds(1.0, 16.0)).unwrap();
        for i in 0..7 {
            assert!((r.nodes[i] + r.nodes[6 - i]).abs() < 1e-15);
        }
        assert!((r.scale - 2.0).abs() < 1e-15);
        assert!((r.weights.iter().sum::<f64>() - 1.0).abs() < 1e-15);
        assert!(QuadratureRule::gauss_chebyshev(0, &bounds(1.0, 2.0)).is_err());
    }

    /// The integral representation itself, checked by brute force on a fine
    /// grid in the angle `u = cos(t)` (the endpoint weight then disappears).
    #[test]
    fn scalar_integral_identity_by_trapezoid() {
        let (a, b) = (1.0f64, 4.0f64);
        for c in [0.5f64, 1.0, 3.0] {
            let points = 1_000_000;
            let h = std::f64::consts::PI / points as f64;
            let g = |t: f64| {
                let u = t.cos();
                c * a * b / ((1.0 - u * u) * a + c * c * u * u * b)
            };
            let mut sum = 0.5 * (g(0.0) + g(std::f64::consts::PI));
            for k in 1..points {
                sum += g(k as f64 * h);
            }
            let integral = sum * h / std::f64::consts::PI;
            assert!((integral - 2.0).abs() < 1e-9, "c = {c}: {integral}");
        }
    }

    #[test]
    fn scalar_quadrature() {
        let cg = CgConfig::default();
        let (x, _) = gauss_chebyshev_geomean(
            &scalar(1.0),
            &scalar(1.0),
            &[1.0],
            5,
            &bounds(1.0, 1.0),
            &cg,
        )
        .unwrap();
        assert!((x[0] - 1.0).abs() < 1e-15);
        let (x, _) = gauss_chebyshev_geomean(
            &scalar(1.0),
            &scalar(4.0),
            &[1.0],
            20,
            &bounds(0.2, 0.3),
            &cg,
        )
        .unwrap();
        assert!((x[0] - 2.0).abs() <= 1e-6);
    }

    #[test]
    fn scalar_error_decreases_with_nodes() {
        // deliberately loose bounds so the integrand is not constant
        let cg = CgConfig::default();
        let b = bounds(0.01, 1.0);
        let mut last = f64::INFINITY;
        for n in [2, 4, 8, 16, 32] {
            let (x, _) =
                gauss_chebyshev_geomean(&scalar(1.0), &scalar(4.0), &[1.0], n, &b, &cg).unwrap();
            let err = (x[0] - 2.0).abs();
            assert!(err <= last, "N = {n}: {err:e} > {last:e}");
            last = err;
        }
        assert!(last < 1e-6);
    }

    #[test]
    fn relative_error_examples() {
        let r = [3.0, 4.0];
        assert_eq!(relative_error(&r, &r).unwrap(), 0.0);
        assert_eq!(relative_error(&[6.0, 8.0], &r).unwrap(), 1.0);
        let e = relative_error(&[1.0 + 1e-8, 0.0], &[1.0, 0.0]).unwrap();
        assert!((e - 1e-8).abs() < 1e-15);
        assert!(matches!(
            relative_error(&r, &[0.0, 0.0]),
            Err(Error::ZeroReference)
        ));
    }
}
