use crate::error::{Error, Result};
use crate::vector::{axpy, dot};

/// Relative residual below which orthogonalization reports a breakdown.
pub const BREAKDOWN_TOL: f64 = 1e-12;

pub trait InnerProduct {
    fn dot(&self, x: &[f64], y: &[f64]) -> Result<f64>;

    fn norm(&self, x: &[f64]) -> Result<f64> {
        Ok(self.dot(x, x)?.max(0.0).sqrt())
    }
}

#[derive(Debug, Clone, Copy, Default)]
pub struct Euclidean;

impl InnerProduct for Euclidean {
    fn dot(&self, x: &[f64], y: &[f64]) -> Result<f64> {
        Ok(dot(x, y))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Orthogonalized {
    /// Projection coefficients `h_{1..j}`, both passes accumulated.
    pub coeffs: Vec<f64>,
    /// `h_{j+1,j}`
    pub residual_norm: f64,
    /// `None` signals breakdown (the vector lies in the span of the basis).
    pub unit_residual: Option<Vec<f64>>,
}

impl Orthogonalized {
    pub fn is_breakdown(&self) -> bool {
        self.unit_residual.is_none()
    }
}

/// Modified Gram-Schmidt against an orthonormal basis, always run twice.
pub fn mgs_orthogonalize(
    w: &[f64],
    basis: &[Vec<f64>],
    inner: &impl InnerProduct,
) -> Result<Orthogonalized> {
    if !crate::vector::all_finite(w) {
        return Err(Error::NonFinite("mgs_orthogonalize input"));
    }
    let w_norm = inner.norm(w)?;
    let mut r = w.to_vec();
    let mut coeffs = vec![0.0; basis.len()];
    for _pass in 0..2 {
        for (q, c) in basis.iter().zip(coeffs.iter_mut()) {
            let h = inner.dot(q, &r)?;
            axpy(-h, q, &mut r);
            *c += h;
        }
    }
    let residual_norm = inner.norm(&r)?;
    let unit_residual = if residual_norm <= BREAKDOWN_TOL * w_norm || residual_norm == 0.0 {
        None
    } else {
        crate::vector::scale(1.0 / residual_norm, &mut r);
        Some(r)
    };
    Ok(Orthogonalized {
        coeffs,
        residual_norm,
        unit_residual,
    })
}
