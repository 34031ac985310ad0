//! Matrix square roots of small matrices.

use super::{sym_eig, DenseMatrix, Lu, Spectral};
use crate::error::{Error, Result};

/// Largest order accepted by the Denman-Beavers iteration.
pub const DB_MAX_ORDER: usize = 512;
pub const DB_MAX_ITER: usize = 60;
const DB_TOL: f64 = 1e-13;
/// Below this relative change a non-shrinking step is treated as the rounding floor.
const DB_PLATEAU: f64 = 1e-8;
/// Determinant scaling is switched off once the change drops below this.
const DB_SCALING_OFF: f64 = 1e-2;

pub fn sqrt_spd<S: Spectral + ?Sized>(s: &S) -> Result<DenseMatrix> {
    let eig = positive_spectrum(s)?;
    Ok(eig.map(f64::sqrt))
}

pub fn invsqrt_spd<S: Spectral + ?Sized>(s: &S) -> Result<DenseMatrix> {
    let eig = positive_spectrum(s)?;
    Ok(eig.map(|l| 1.0 / l.sqrt()))
}

fn positive_spectrum<S: Spectral + ?Sized>(s: &S) -> Result<super::SymEigen> {
    let eig = sym_eig(s)?;
    if let Some(&min) = eig.values.first() {
        if min <= 0.0 {
            return Err(Error::NotPositiveDefinite {
                context: "square root",
                value: min,
            });
        }
    }
    Ok(eig)
}

/// Scaled Denman-Beavers iteration in product form. Returns `(M^{1/2}, M^{-1/2})`
/// for a (possibly nonsymmetric) matrix whose eigenvalues avoid the closed
/// negative real axis. The product form keeps `Y Z^{-1} = M` exactly in exact
/// arithmetic and does not amplify rounding for nonnormal inputs the way the
/// coupled form does.
pub fn db_sqrt_general(m: &DenseMatrix) -> Result<(DenseMatrix, DenseMatrix)> {
    if !m.is_square() {
        return Err(Error::DimensionMismatch {
            context: "db_sqrt_general",
            expected: m.rows(),
            found: m.cols(),
        });
    }
    let n = m.rows();
    if n > DB_MAX_ORDER {
        return Err(Error::InvalidParameter(format!(
            "db_sqrt_general: order {n} exceeds {DB_MAX_ORDER}"
        )));
    }
    if !m.all_finite() {
        return Err(Error::NonFinite("db_sqrt_general input"));
    }
    let id = DenseMatrix::identity(n);
    if n == 0 {
        return Ok((m.clone(), id));
    }
    // invariants: P = Y Z, Y -> M^{1/2}, Z -> M^{-1/2}, P -> I
    let mut p = m.clone();
    let mut y = m.clone();
    let mut z = id.clone();
    let mut scaling = true;
    let mut prev_change = f64::INFINITY;
    for _ in 0..DB_MAX_ITER {
        let lu = Lu::factor(&p, "db_sqrt_general iterate")?;
        let mu = if scaling {
            let (_, ld) = lu.log_det();
            (-ld / (2.0 * n as f64)).exp()
        } else {
            1.0
        };
        let p_inv = lu.inverse();
        // factor = (I + mu^{-2} P^{-1}) mu / 2
        let factor = id.lin_comb(0.5 * mu, &p_inv, 0.5 / mu);
        let y_next = y.matmul(&factor)?;
        let z_next = z.matmul(&factor)?;
        let p_next = id.lin_comb(
            0.5,
            &p.lin_comb(0.25 * mu * mu, &p_inv, 0.25 / (mu * mu)),
            1.0,
        );
        if !y_next.all_finite() || !z_next.all_finite() || !p_next.all_finite() {
            return Err(Error::NonFinite("db_sqrt_general iterate"));
        }
        let change = y_next.sub(&y).frobenius_norm() / y_next.frobenius_norm();
        let defect = p_next.sub(&id).frobenius_norm();
        y = y_next;
        z = z_next;
        p = p_next;
        if change <= DB_TOL || defect <= DB_TOL {
            return Ok((y, z));
        }
        if change <= DB_PLATEAU && change > 0.5 * prev_change {
            log::debug!("db_sqrt_general: rounding plateau at relative change {change:e}");
            return Ok((y, z));
        }
        if change < DB_SCALING_OFF {
            scaling = false;
        }
        prev_change = change;
    }
    Err(Error::NoConvergence {
        routine: "db_sqrt_general",
        iterations: DB_MAX_ITER,
    })
}
