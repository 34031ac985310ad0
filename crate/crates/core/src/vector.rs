//! BLAS-1 style helpers on `f64` slices.

#[inline]
pub fn dot(x: &[f64], y: &[f64]) -> f64 {
    assert_eq!(x.len(), y.len(), "dot: length mismatch");
    x.iter().zip(y).map(|(a, b)| a * b).sum()
}

#[inline]
pub fn norm2(x: &[f64]) -> f64 {
    dot(x, x).sqrt()
}

/// `y += alpha * x`
#[inline]
pub fn axpy(alpha: f64, x: &[f64], y: &mut [f64]) {
    assert_eq!(x.len(), y.len(), "axpy: length mismatch");
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += alpha * xi;
    }
}

#[inline]
pub fn scale(alpha: f64, x: &mut [f64]) {
    x.iter_mut().for_each(|v| *v *= alpha);
}

pub fn sub(x: &[f64], y: &[f64]) -> Vec<f64> {
    assert_eq!(x.len(), y.len(), "sub: length mismatch");
    x.iter().zip(y).map(|(a, b)| a - b).collect()
}

pub fn all_finite(x: &[f64]) -> bool {
    x.iter().all(|v| v.is_finite())
}

/// `sum_j coeffs[j] * columns[j]`
pub fn combine(columns: &[Vec<f64>], coeffs: &[f64]) -> Vec<f64> {
    assert!(!columns.is_empty(), "combine: no columns");
    assert!(
        coeffs.len() <= columns.len(),
        "combine: too many coefficients"
    );
    let mut out = vec![0.0; columns[0].len()];
    for (c, col) in coeffs.iter().zip(columns) {
        axpy(*c, col, &mut out);
    }
    out
}
