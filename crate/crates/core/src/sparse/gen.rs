//! Test problem generators.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use super::SparseMatrix;
use crate::dense::{self, DenseMatrix, Euclidean};
use crate::error::{Error, Result};

/// 1D finite-difference Laplacian `tridiag(-1, 2, -1)` of order `n`.
pub fn lap1d(n: usize) -> Result<SparseMatrix> {
    if n == 0 {
        return Err(Error::InvalidSize("lap1d needs n >= 1"));
    }
    let triplets = (0..n).flat_map(|i| {
        let left = (i > 0).then(|| (i, i - 1, -1.0));
        let right = (i + 1 < n).then(|| (i, i + 1, -1.0));
        left.into_iter()
            .chain(std::iter::once((i, i, 2.0)))
            .chain(right)
    });
    SparseMatrix::from_triplets(n, n, triplets)
}

/// 5-point Laplacian on a `k x k` grid (order `k^2`, lexicographic ordering).
pub fn lap2d(k: usize) -> Result<SparseMatrix> {
    if k == 0 {
        return Err(Error::InvalidSize("lap2d needs k >= 1"));
    }
    let n = k * k;
    let mut triplets = Vec::with_capacity(5 * n);
    for row in 0..k {
        for col in 0..k {
            let i = row * k + col;
            if row > 0 {
                triplets.push((i, i - k, -1.0));
            }
            if col > 0 {
                triplets.push((i, i - 1, -1.0));
            }
            triplets.push((i, i, 4.0));
            if col + 1 < k {
                triplets.push((i, i + 1, -1.0));
            }
            if row + 1 < k {
                triplets.push((i, i + k, -1.0));
            }
        }
    }
    SparseMatrix::from_triplets(n, n, triplets)
}

/// `M^T M + n I` with `M` uniform on `[0, 1)`, seeded. Dense pattern.
pub fn random_spd(n: usize, seed: u64) -> Result<SparseMatrix> {
    if n == 0 {
        return Err(Error::InvalidSize("random_spd needs n >= 1"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let m = DenseMatrix::from_fn(n, n, |_, _| rng.random::<f64>());
    let mut g = m.transpose().matmul(&m)?.symmetrized();
    for i in 0..n {
        g[(i, i)] += n as f64;
    }
    SparseMatrix::from_dense(&g)
}

/// `Q diag(λ) Q^T` with `Q` a seeded random orthogonal matrix and `λ`
/// log-spaced on `[1, condition]`.
pub fn random_spd_with_condition(n: usize, condition: f64, seed: u64) -> Result<SparseMatrix> {
    if n == 0 {
        return Err(Error::InvalidSize("random_spd_with_condition needs n >= 1"));
    }
    if !(condition >= 1.0 && condition.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "condition number must be finite and >= 1, got {condition}"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut basis: Vec<Vec<f64>> = Vec::with_capacity(n);
    while basis.len() < n {
        let w: Vec<f64> = (0..n).map(|_| rng.sample(StandardNormal)).collect();
        let o = dense::mgs_orthogonalize(&w, &basis, &Euclidean)?;
        if let Some(q) = o.unit_residual {
            basis.push(q);
        }
    }
    let log_cond = condition.ln();
    let scale: Vec<f64> = (0..n)
        .map(|i| {
            let t = if n == 1 {
                0.0
            } else {
                i as f64 / (n - 1) as f64
            };
            (0.5 * t * log_cond).exp()
        })
        .collect();
    // columns of Q scaled by sqrt(λ), then W W^T
    let w = DenseMatrix::from_fn(n, n, |i, j| basis[j][i] * scale[j]);
    let a = w.matmul(&w.transpose())?.symmetrized();
    SparseMatrix::from_dense(&a)
}
