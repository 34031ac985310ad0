//! Eigenvalues of small nonsymmetric matrices: elimination to Hessenberg
//! form followed by the shifted double-step QR iteration.

use num_complex::Complex64;

use super::DenseMatrix;
use crate::error::{Error, Result};

const MAX_QR_ITER: usize = 30;

/// 1-based view used by the two routines below.
struct Work {
    n: usize,
    a: Vec<f64>,
}

impl Work {
    #[inline]
    fn get(&self, i: usize, j: usize) -> f64 {
        self.a[(i - 1) * self.n + (j - 1)]
    }

    #[inline]
    fn set(&mut self, i: usize, j: usize, v: f64) {
        self.a[(i - 1) * self.n + (j - 1)] = v;
    }

    #[inline]
    fn sub(&mut self, i: usize, j: usize, v: f64) {
        self.a[(i - 1) * self.n + (j - 1)] -= v;
    }

    fn swap(&mut self, (i1, j1): (usize, usize), (i2, j2): (usize, usize)) {
        self.a
            .swap((i1 - 1) * self.n + j1 - 1, (i2 - 1) * self.n + j2 - 1);
    }
}

/// Eigenvalues of a square matrix, sorted by real then imaginary part.
pub fn ritz_values(m: &DenseMatrix) -> Result<Vec<Complex64>> {
    if !m.is_square() {
        return Err(Error::DimensionMismatch {
            context: "ritz_values",
            expected: m.rows(),
            found: m.cols(),
        });
    }
    if !m.all_finite() {
        return Err(Error::NonFinite("ritz_values input"));
    }
    let n = m.rows();
    let mut w = Work {
        n,
        a: m.as_slice().to_vec(),
    };
    to_hessenberg(&mut w);
    for i in 1..=n {
        for j in 1..i.saturating_sub(1) {
            w.set(i, j, 0.0);
        }
    }
    let mut out = hessenberg_qr(&mut w)?;
    out.sort_by(|a, b| a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im)));
    Ok(out)
}

fn to_hessenberg(w: &mut Work) {
    let n = w.n;
    for m in 2..n {
        let mut x: f64 = 0.0;
        let mut i = m;
        for j in m..=n {
            if w.get(j, m - 1).abs() > x.abs() {
                x = w.get(j, m - 1);
                i = j;
            }
        }
        if i != m {
            for j in m - 1..=n {
                w.swap((i, j), (m, j));
            }
            for j in 1..=n {
                w.swap((j, i), (j, m));
            }
        }
        if x != 0.0 {
            for i in m + 1..=n {
                let mut y = w.get(i, m - 1);
                if y != 0.0 {
                    y /= x;
                    w.set(i, m - 1, y);
                    for j in m..=n {
                        let v = y * w.get(m, j);
                        w.sub(i, j, v);
                    }
                    for j in 1..=n {
                        let v = y * w.get(j, i);
                        w.sub(j, m, -v);
                    }
                }
            }
        }
    }
}

fn hessenberg_qr(w: &mut Work) -> Result<Vec<Complex64>> {
    let n = w.n;
    let mut wr = vec![0.0; n + 1];
    let mut wi = vec![0.0; n + 1];
    let mut anorm = 0.0;
    for i in 1..=n {
        for j in i.saturating_sub(1).max(1)..=n {
            anorm += w.get(i, j).abs();
        }
    }
    let mut nn = n as isize;
    let mut t = 0.0;
    while nn >= 1 {
        let mut its = 0;
        loop {
            let nu = nn as usize;
            let mut l = nu;
            while l >= 2 {
                let mut s = w.get(l - 1, l - 1).abs() + w.get(l, l).abs();
                if s == 0.0 {
                    s = anorm;
                }
                if w.get(l, l - 1).abs() + s == s {
                    w.set(l, l - 1, 0.0);
                    break;
                }
                l -= 1;
            }
            let mut x = w.get(nu, nu);
            if l == nu {
                wr[nu] = x + t;
                wi[nu] = 0.0;
                nn -= 1;
            } else {
                let mut y = w.get(nu - 1, nu - 1);
                let mut ww = w.get(nu, nu - 1) * w.get(nu - 1, nu);
                if l == nu - 1 {
                    let p = 0.5 * (y - x);
                    let q = p * p + ww;
                    let mut z = q.abs().sqrt();
                    x += t;
                    if q >= 0.0 {
                        z = p + z.copysign(p);
                        wr[nu - 1] = x + z;
                        wr[nu] = x + z;
                        if z != 0.0 {
                            wr[nu] = x - ww / z;
                        }
                        wi[nu - 1] = 0.0;
                        wi[nu] = 0.0;
                    } else {
                        wr[nu - 1] = x + p;
                        wr[nu] = x + p;
                        wi[nu - 1] = -z;
                        wi[nu] = z;
                    }
                    nn -= 2;
                } else {
                    if its == MAX_QR_ITER {
                        return Err(Error::NoConvergence {
                            routine: "ritz_values",
                            iterations: MAX_QR_ITER,
                        });
                    }
                    if its == 10 || its == 20 {
                        // exceptional shift
                        t += x;
                        for i in 1..=nu {
                            w.sub(i, i, x);
                        }
                        let s = w.get(nu, nu - 1).abs() + w.get(nu - 1, nu - 2).abs();
                        x = 0.75 * s;
                        y = x;
                        ww = -0.4375 * s * s;
                    }
                    its += 1;
                    let (mut p, mut q, mut r);
                    let mut z;
                    let mut m = nu - 2;
                    loop {
                        z = w.get(m, m);
                        r = x - z;
                        let s = y - z;
                        p = (r * s - ww) / w.get(m + 1, m) + w.get(m, m + 1);
                        q = w.get(m + 1, m + 1) - z - r - s;
                        r = w.get(m + 2, m + 1);
                        let s = p.abs() + q.abs() + r.abs();
                        p /= s;
                        q /= s;
                        r /= s;
                        if m == l {
                            break;
                        }
                        let u = w.get(m, m - 1).abs() * (q.abs() + r.abs());
                        let v = p.abs()
                            * (w.get(m - 1, m - 1).abs() + z.abs() + w.get(m + 1, m + 1).abs());
                        if u + v == v {
                            break;
                        }
                        m -= 1;
                    }
                    for i in m + 2..=nu {
                        w.set(i, i - 2, 0.0);
                        if i != m + 2 {
                            w.set(i, i - 3, 0.0);
                        }
                    }
                    let mut k = m;
                    while k < nu {
                        if k != m {
                            p = w.get(k, k - 1);
                            q = w.get(k + 1, k - 1);
                            r = 0.0;
                            if k != nu - 1 {
                                r = w.get(k + 2, k - 1);
                            }
                            x = p.abs() + q.abs() + r.abs();
                            if x != 0.0 {
                                p /= x;
                                q /= x;
                                r /= x;
                            }
                        }
                        let s = (p * p + q * q + r * r).sqrt().copysign(p);
                        if s != 0.0 {
                            if k == m {
                                if l != m {
                                    let v = -w.get(k, k - 1);
                                    w.set(k, k - 1, v);
                                }
                            } else {
                                w.set(k, k - 1, -s * x);
                            }
                            p += s;
                            x = p / s;
                            y = q / s;
                            z = r / s;
                            q /= p;
                            r /= p;
                            for j in k..=nu {
                                let mut pp = w.get(k, j) + q * w.get(k + 1, j);
                                if k != nu - 1 {
                                    pp += r * w.get(k + 2, j);
                                    w.sub(k + 2, j, pp * z);
                                }
                                w.sub(k + 1, j, pp * y);
                                w.sub(k, j, pp * x);
                            }
                            let mmin = nu.min(k + 3);
                            for i in l..=mmin {
                                let mut pp = x * w.get(i, k) + y * w.get(i, k + 1);
                                if k != nu - 1 {
                                    pp += z * w.get(i, k + 2);
                                    w.sub(i, k + 2, pp * r);
                                }
                                w.sub(i, k + 1, pp * q);
                                w.sub(i, k, pp);
                            }
                        }
                        k += 1;
                    }
                }
            }
            if !((l as isize) < nn - 1) {
                break;
            }
        }
    }
    Ok((1..=n).map(|i| Complex64::new(wr[i], wi[i])).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn triangular_and_rotation() {
        let m = DenseMatrix::from_rows(&[vec![3.0, 5.0], vec![0.0, -1.0]]);
        let r = ritz_values(&m).unwrap();
        assert!((r[0] - Complex64::new(-1.0, 0.0)).norm() < 1e-14);
        assert!((r[1] - Complex64::new(3.0, 0.0)).norm() < 1e-14);
        let rot = DenseMatrix::from_rows(&[vec![0.0, -2.0], vec![2.0, 0.0]]);
        let r = ritz_values(&rot).unwrap();
        assert!((r[0] - Complex64::new(0.0, -2.0)).norm() < 1e-14);
        assert!((r[1] - Complex64::new(0.0, 2.0)).norm() < 1e-14);
    }

    #[test]
    fn companion_matrix_roots() {
        // x^3 - 6x^2 + 11x - 6 = (x-1)(x-2)(x-3)
        let m = DenseMatrix::from_rows(&[
            vec![6.0, -11.0, 6.0],
            vec![1.0, 0.0, 0.0],
            vec![0.0, 1.0, 0.0],
        ]);
        let r = ritz_values(&m).unwrap();
        for (k, z) in r.iter().enumerate() {
            assert!((z.re - (k + 1) as f64).abs() < 1e-12 && z.im.abs() < 1e-12);
        }
    }

    #[test]
    fn trace_and_symmetric_agreement() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for n in [1, 4, 17, 40] {
            let m = DenseMatrix::from_fn(n, n, |_, _| rng.random::<f64>() - 0.5);
            let r = ritz_values(&m).unwrap();
            let sum: Complex64 = r.iter().sum();
            assert!((sum.re - m.trace()).abs() < 1e-11 && sum.im.abs() < 1e-11);
            let s = m.symmetrized();
            let rs = ritz_values(&s).unwrap();
            let es = crate::dense::sym_eig(&s).unwrap().values;
            for (a, b) in rs.iter().zip(&es) {
                assert!((a.re - b).abs() < 1e-11 && a.im.abs() < 1e-11);
            }
        }
    }
}
