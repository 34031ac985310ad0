//! Conjugate gradients on SPD matrices and pencil combinations, B-inner
//! products, and extreme eigenvalues of the pencil `B^{-1} A`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::dense::InnerProduct;
use crate::error::{Error, Result};
use crate::sparse::{pencil_combine, SparseMatrix};
use crate::vector::{axpy, dot, norm2};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CgConfig {
    pub rel_tol: f64,
    /// `None` means `10 * n`.
    pub max_iter: Option<usize>,
}

impl Default for CgConfig {
    fn default() -> Self {
        CgConfig {
            rel_tol: 1e-12,
            max_iter: None,
        }
    }
}

impl CgConfig {
    pub fn with_tol(rel_tol: f64) -> Self {
        CgConfig {
            rel_tol,
            ..Default::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.rel_tol > 0.0 && self.rel_tol < 1.0) {
            return Err(Error::InvalidParameter(format!(
                "CG tolerance must lie in (0, 1), got {}",
                self.rel_tol
            )));
        }
        if self.max_iter == Some(0) {
            return Err(Error::InvalidParameter("CG max_iter must be >= 1".into()));
        }
        Ok(())
    }

    pub fn max_iter_for(&self, n: usize) -> usize {
        self.max_iter.unwrap_or(10 * n.max(1))
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolveStats {
    pub iterations: usize,
    pub final_relative_residual: f64,
    pub converged: bool,
}

/// Totals over many inner solves.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct SolveTotals {
    pub solves: usize,
    pub iterations: usize,
    pub max_iterations: usize,
    pub worst_relative_residual: f64,
    pub unconverged: usize,
}

impl SolveTotals {
    pub fn record(&mut self, s: &SolveStats) {
        self.solves += 1;
        self.iterations += s.iterations;
        self.max_iterations = self.max_iterations.max(s.iterations);
        self.worst_relative_residual = self.worst_relative_residual.max(s.final_relative_residual);
        if !s.converged {
            self.unconverged += 1;
        }
    }

    pub fn merge(&mut self, other: &SolveTotals) {
        self.solves += other.solves;
        self.iterations += other.iterations;
        self.max_iterations = self.max_iterations.max(other.max_iterations);
        self.worst_relative_residual = self
            .worst_relative_residual
            .max(other.worst_relative_residual);
        self.unconverged += other.unconverged;
    }
}

/// Unpreconditioned CG. Stops when the recursively updated residual satisfies
/// `||r|| <= rel_tol * ||b||`; hitting `max_iter` is not an error but is
/// recorded in the stats.
pub fn cg_solve(m: &SparseMatrix, b: &[f64], cfg: &CgConfig) -> Result<(Vec<f64>, SolveStats)> {
    cfg.validate()?;
    if !m.is_square() || m.n_rows() != b.len() {
        return Err(Error::DimensionMismatch {
            context: "cg_solve",
            expected: m.n_rows(),
            found: b.len(),
        });
    }
    if !crate::vector::all_finite(b) {
        return Err(Error::NonFinite("cg_solve right-hand side"));
    }
    let n = b.len();
    let b_norm = norm2(b);
    let mut x = vec![0.0; n];
    if b_norm == 0.0 {
        return Ok((
            x,
            SolveStats {
                iterations: 0,
                final_relative_residual: 0.0,
                converged: true,
            },
        ));
    }
    let max_iter = cfg.max_iter_for(n);
    let target = cfg.rel_tol * b_norm;
    let mut r = b.to_vec();
    let mut p = r.clone();
    let mut q = vec![0.0; n];
    let mut rr = dot(&r, &r);
    let mut iterations = 0;
    while iterations < max_iter {
        m.apply(&p, &mut q);
        let curvature = dot(&p, &q);
        if !(curvature > 0.0) {
            if curvature.is_nan() {
                return Err(Error::NonFinite("cg_solve curvature"));
            }
            return Err(Error::Indefinite { curvature });
        }
        let alpha = rr / curvature;
        axpy(alpha, &p, &mut x);
        axpy(-alpha, &q, &mut r);
        iterations += 1;
        let rr_next = dot(&r, &r);
        if !rr_next.is_finite() {
            return Err(Error::NonFinite("cg_solve residual"));
        }
        if rr_next.sqrt() <= target {
            rr = rr_next;
            break;
        }
        let beta = rr_next / rr;
        rr = rr_next;
        for (pi, ri) in p.iter_mut().zip(&r) {
            *pi = ri + beta * *pi;
        }
    }
    let rel = rr.sqrt() / b_norm;
    let converged = rel <= cfg.rel_tol;
    if !converged {
        log::warn!("cg_solve: {iterations} iterations, relative residual {rel:e}");
    }
    Ok((
        x,
        SolveStats {
            iterations,
            final_relative_residual: rel,
            converged,
        },
    ))
}

/// CG on `alpha*A + beta*B`. Pure `A` or pure `B` systems skip the merge.
pub fn solve_spd_pencil(
    alpha: f64,
    a: &SparseMatrix,
    beta: f64,
    b: &SparseMatrix,
    rhs: &[f64],
    cfg: &CgConfig,
) -> Result<(Vec<f64>, SolveStats)> {
    if beta == 0.0 || alpha == 0.0 {
        let (m, c) = if beta == 0.0 { (a, alpha) } else { (b, beta) };
        if c == 0.0 {
            return Err(Error::InvalidParameter(
                "solve_spd_pencil: both coefficients are zero".into(),
            ));
        }
        let (mut x, stats) = cg_solve(m, rhs, cfg)?;
        crate::vector::scale(1.0 / c, &mut x);
        return Ok((x, stats));
    }
    let m = pencil_combine(alpha, a, beta, b)?;
    cg_solve(&m, rhs, cfg)
}

/// `x^T B y`
pub fn b_inner(b: &SparseMatrix, x: &[f64], y: &[f64]) -> Result<f64> {
    let by = b.matvec(y)?;
    if x.len() != by.len() {
        return Err(Error::DimensionMismatch {
            context: "b_inner",
            expected: by.len(),
            found: x.len(),
        });
    }
    Ok(dot(x, &by))
}

pub fn b_norm(b: &SparseMatrix, x: &[f64]) -> Result<f64> {
    let q = b_inner(b, x, x)?;
    if q < 0.0 {
        return Err(Error::NotPositiveDefinite {
            context: "B-norm",
            value: q,
        });
    }
    Ok(q.sqrt())
}

/// Inner product `<x, y> = x^T B y`.
#[derive(Debug, Clone, Copy)]
pub struct BInner<'a>(pub &'a SparseMatrix);

impl InnerProduct for BInner<'_> {
    fn dot(&self, x: &[f64], y: &[f64]) -> Result<f64> {
        b_inner(self.0, x, y)
    }

    fn norm(&self, x: &[f64]) -> Result<f64> {
        b_norm(self.0, x)
    }
}

/// Returns the smallest of `samples` seeded Rayleigh quotients `x^T M x / x^T x`.
pub fn rayleigh_probe(m: &SparseMatrix, samples: usize, seed: u64) -> Result<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst = f64::INFINITY;
    for _ in 0..samples {
        let x: Vec<f64> = (0..m.n_cols()).map(|_| rng.random::<f64>() - 0.5).collect();
        let q = dot(&x, &m.matvec(&x)?) / dot(&x, &x);
        worst = worst.min(q);
    }
    Ok(worst)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PencilSpectrumBounds {
    pub lambda_min: f64,
    pub lambda_max: f64,
    /// Last relative change of the Rayleigh quotients (worse of the two runs).
    pub rel_tol_achieved: f64,
}

impl PencilSpectrumBounds {
    pub fn new(lambda_min: f64, lambda_max: f64) -> Result<Self> {
        if !(lambda_min > 0.0 && lambda_min <= lambda_max && lambda_max.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "invalid spectral interval [{lambda_min}, {lambda_max}]"
            )));
        }
        Ok(PencilSpectrumBounds {
            lambda_min,
            lambda_max,
            rel_tol_achieved: 0.0,
        })
    }

    pub fn contains(&self, x: f64) -> bool {
        self.lambda_min <= x && x <= self.lambda_max
    }
}

pub const POWER_MAX_ITER: usize = 500;
const POWER_CG_TOL: f64 = 1e-8;

/// Power iteration on `z -> solve(den, num z)`. Returns the largest
/// eigenvalue estimate, its last relative change and the relative residual
/// `||Mz - rho z||_den / (rho ||z||_den)`, which bounds the estimate's error.
fn power_iteration(num: &SparseMatrix, den: &SparseMatrix, tol: f64) -> Result<(f64, f64, f64)> {
    let n = num.n_rows();
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
    let mut z: Vec<f64> = (0..n).map(|_| 0.5 + rng.random::<f64>()).collect();
    let cfg = CgConfig::with_tol(POWER_CG_TOL);
    let mut prev = f64::NAN;
    let mut change = f64::INFINITY;
    let mut residual = f64::INFINITY;
    for _ in 0..POWER_MAX_ITER {
        let nz = num.matvec(&z)?;
        let dz = den.matvec(&z)?;
        let zdz = dot(&z, &dz);
        let rho = dot(&z, &nz) / zdz;
        if !rho.is_finite() || rho <= 0.0 {
            return Err(Error::NotPositiveDefinite {
                context: "pencil Rayleigh quotient",
                value: rho,
            });
        }
        let (w, _) = cg_solve(den, &nz, &cfg)?;
        let r: Vec<f64> = w.iter().zip(&z).map(|(wi, zi)| wi - rho * zi).collect();
        residual = b_norm(den, &r)? / (rho * zdz.sqrt());
        change = ((rho - prev) / rho).abs();
        prev = rho;
        if change <= tol {
            return Ok((rho, change, residual));
        }
        let norm = norm2(&w);
        z = w.into_iter().map(|v| v / norm).collect();
    }
    log::warn!(
        "power iteration: no convergence in {POWER_MAX_ITER} iterations (change {change:e})"
    );
    Ok((prev, change, residual))
}

/// Extreme eigenvalues of `B^{-1} A`. Each estimate is widened by the larger
/// of `10 tol` and its relative eigen-residual.
pub fn extreme_pencil_eigs(
    a: &SparseMatrix,
    b: &SparseMatrix,
    tol: f64,
) -> Result<PencilSpectrumBounds> {
    if a.n_rows() != b.n_rows() || !a.is_square() || !b.is_square() {
        return Err(Error::DimensionMismatch {
            context: "extreme_pencil_eigs",
            expected: a.n_rows(),
            found: b.n_rows(),
        });
    }
    if !(tol > 0.0 && tol < 0.1) {
        return Err(Error::InvalidParameter(format!(
            "power iteration tolerance must lie in (0, 0.1), got {tol}"
        )));
    }
    let (hi, c1, r1) = power_iteration(a, b, tol)?;
    let (inv_lo, c2, r2) = power_iteration(b, a, tol)?;
    let widen_hi = (10.0 * tol).max(r1);
    let widen_lo = (10.0 * tol).max(r2);
    Ok(PencilSpectrumBounds {
        lambda_min: 1.0 / (inv_lo * (1.0 + widen_lo)),
        lambda_max: hi * (1.0 + widen_hi),
        rel_tol_achieved: c1.max(c2),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dense::{sym_eig, DenseMatrix};
    use crate::sparse::{lap1d, random_spd};

    fn close(a: &[f64], b: &[f64], tol: f64) -> bool {
        a.iter().zip(b).all(|(x, y)| (x - y).abs() <= tol)
    }

    #[test]
    fn identity_in_one_iteration() {
        let b = [1.0, -2.0, 3.5];
        let (x, s) = cg_solve(&SparseMatrix::identity(3), &b, &CgConfig::default()).unwrap();
        assert_eq!(x, b.to_vec());
        assert_eq!(s.iterations, 1);
        assert!(s.converged);
    }

    #[test]
    fn lap1d_small_solve() {
        let (x, _) = cg_solve(&lap1d(3).unwrap(), &[1.0, 0.0, 0.0], &CgConfig::default()).unwrap();
        assert!(close(&x, &[0.75, 0.5, 0.25], 1e-14));
    }

    #[test]
    fn lap1d_finite_termination() {
        let n = 50;
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let b: Vec<f64> = (0..n).map(|_| rng.random::<f64>()).collect();
        let a = lap1d(n).unwrap();
        let (x, s) = cg_solve(&a, &b, &CgConfig::default()).unwrap();
        let r = crate::vector::sub(&a.matvec(&x).unwrap(), &b);
        assert!(norm2(&r) <= 1e-12 * norm2(&b) * 10.0);
        assert!(s.iterations <= n, "{} iterations", s.iterations);
    }

    #[test]
    fn zero_rhs_and_errors() {
        let (x, s) = cg_solve(&lap1d(4).unwrap(), &[0.0; 4], &CgConfig::default()).unwrap();
        assert_eq!(x, vec![0.0; 4]);
        assert_eq!(s.iterations, 0);
        let neg = SparseMatrix::diagonal(&[1.0, -1.0]).unwrap();
        assert!(matches!(
            cg_solve(&neg, &[0.0, 1.0], &CgConfig::default()),
            Err(Error::Indefinite { .. })
        ));
        assert!(cg_solve(&lap1d(3).unwrap(), &[1.0], &CgConfig::default()).is_err());
        assert!(cg_solve(&lap1d(2).unwrap(), &[1.0, 1.0], &CgConfig::with_tol(0.0)).is_err());
    }

    #[test]
    fn iteration_cap_is_reported() {
        let cfg = CgConfig {
            rel_tol: 1e-12,
            max_iter: Some(2),
        };
        let (_, s) = cg_solve(&lap1d(40).unwrap(), &vec![1.0; 40], &cfg).unwrap();
        assert_eq!(s.iterations, 2);
        assert!(!s.converged);
    }

    #[test]
    fn pencil_reductions() {
        let a = lap1d(6).unwrap();
        let b = SparseMatrix::diagonal(&[2.0; 6]).unwrap();
        let rhs = vec![1.0, 2.0, 3.0, 4.0, 5.0, 6.0];
        let cfg = CgConfig::default();
        let (xb, _) = solve_spd_pencil(0.0, &a, 1.0, &b, &rhs, &cfg).unwrap();
        assert_eq!(xb, cg_solve(&b, &rhs, &cfg).unwrap().0);
        let (xa, _) = solve_spd_pencil(1.0, &a, 0.0, &b, &rhs, &cfg).unwrap();
        assert_eq!(xa, cg_solve(&a, &rhs, &cfg).unwrap().0);
    }

    #[test]
    fn pencil_matches_dense_solve() {
        let n = 20;
        let a = lap1d(n).unwrap();
        let mut e1 = vec![0.0; n];
        e1[0] = 1.0;
        let (x, _) = solve_spd_pencil(
            1.0,
            &a,
            1.0,
            &SparseMatrix::identity(n),
            &e1,
            &CgConfig::default(),
        )
        .unwrap();
        let mut m = a.to_dense();
        for i in 0..n {
            m[(i, i)] += 1.0;
        }
        let rhs = DenseMatrix::from_columns(&[e1]);
        let oracle = crate::dense::small_solve(&m, &rhs).unwrap().column(0);
        assert!(close(&x, &oracle, 1e-12));
    }

    #[test]
    fn b_inner_products() {
        let b = SparseMatrix::diagonal(&[1.0, 4.0]).unwrap();
        assert_eq!(b_inner(&b, &[1.0, 1.0], &[1.0, 1.0]).unwrap(), 5.0);
        let i = SparseMatrix::identity(3);
        assert_eq!(
            b_inner(&i, &[1.0, 2.0, 3.0], &[4.0, 5.0, 6.0]).unwrap(),
            32.0
        );
        assert!(b_norm(&SparseMatrix::diagonal(&[-1.0]).unwrap(), &[1.0]).is_err());
        assert!(b_inner(&i, &[1.0], &[1.0, 2.0, 3.0]).is_err());
    }

    #[test]
    fn b_inner_symmetric_on_random_inputs() {
        let b = random_spd(15, 2).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for _ in 0..10 {
            let x: Vec<f64> = (0..15).map(|_| rng.random::<f64>() - 0.5).collect();
            let y: Vec<f64> = (0..15).map(|_| rng.random::<f64>() - 0.5).collect();
            let xy = b_inner(&b, &x, &y).unwrap();
            let yx = b_inner(&b, &y, &x).unwrap();
            assert!((xy - yx).abs() <= 1e-13 * xy.abs().max(1.0));
            let nx = b_norm(&b, &x).unwrap();
            assert!((nx * nx - b_inner(&b, &x, &x).unwrap()).abs() <= 1e-12 * nx * nx);
        }
    }

    #[test]
    fn extreme_eigs_trivial_pencils() {
        let tol = 1e-3;
        let a = random_spd(10, 1).unwrap();
        let same = extreme_pencil_eigs(&a, &a, tol).unwrap();
        assert!((same.lambda_min - 1.0).abs() <= 10.0 * tol + 1e-6);
        assert!((same.lambda_max - 1.0).abs() <= 10.0 * tol + 1e-6);
        let d = SparseMatrix::diagonal(&[1.0, 2.0, 3.0]).unwrap();
        let r = extreme_pencil_eigs(&d, &SparseMatrix::identity(3), tol).unwrap();
        assert!(r.lambda_min <= 1.0 && r.lambda_min >= 1.0 - 20.0 * tol);
        assert!(r.lambda_max >= 3.0 && r.lambda_max <= 3.0 * (1.0 + 20.0 * tol));
    }

    #[test]
    fn extreme_eigs_match_dense_lap1d() {
        let tol = 1e-3;
        let a = lap1d(30).unwrap();
        let exact = sym_eig(&a.to_dense()).unwrap();
        let r = extreme_pencil_eigs(&a, &SparseMatrix::identity(30), tol).unwrap();
        assert!(r.lambda_min <= exact.min() && r.lambda_max >= exact.max());
        // the residual widening may loosen the interval beyond 10 tol, but not by much
        assert!((r.lambda_min - exact.min()).abs() <= 0.1 * exact.min());
        assert!((r.lambda_max - exact.max()).abs() <= 0.1 * exact.max());
    }

    #[test]
    fn probe_detects_definiteness() {
        assert!(rayleigh_probe(&lap1d(10).unwrap(), 20, 1).unwrap() > 0.0);
        let neg = SparseMatrix::diagonal(&[-1.0; 4]).unwrap();
        assert!(rayleigh_probe(&neg, 20, 1).unwrap() < 0.0);
    }
}
