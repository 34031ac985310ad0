use super::{
    check_inputs, GeomeanConfig, GeomeanOutput, InnerKind, KrylovDecomposition, Termination,
    Tracker,
};
use crate::dense::{sym_eig, SymTridiagonal, BREAKDOWN_TOL};
use crate::error::{Error, Result};
use crate::poles::Pole;
use crate::solvers::cg_solve;
use crate::sparse::SparseMatrix;
use crate::vector::{axpy, dot};

/// Generalized Lanczos: B-orthonormal basis of `K(B^{-1}A, v)`, tridiagonal
/// `T = Q^T A Q`, result `B Q T^{1/2} e_1 |v|_B`.
///
/// The basis is reorthogonalized (two passes) against all previous vectors;
/// the B-images of the basis are cached so this costs no extra solves.
pub fn gen_lanczos_geomean(
    a: &SparseMatrix,
    b: &SparseMatrix,
    v: &[f64],
    cfg: &GeomeanConfig,
    reference: Option<&[f64]>,
) -> Result<GeomeanOutput> {
    check_inputs(a, b, v, cfg)?;
    let n = v.len();
    let cap = cfg.max_steps.min(n);
    let mut tracker = Tracker::new("genlanczos", cfg, reference)?;

    let bv = b.matvec(v)?;
    let vv = dot(v, &bv);
    if !(vv > 0.0) {
        return Err(Error::NotPositiveDefinite {
            context: "B-norm of the starting vector",
            value: vv,
        });
    }
    let v_norm = vv.sqrt();
    let mut dec = KrylovDecomposition::new(
        v.iter().map(|x| x / v_norm).collect(),
        false,
        InnerKind::BWeighted,
        false,
    );
    let mut images = vec![bv.iter().map(|x| x / v_norm).collect::<Vec<f64>>()];
    let mut alphas: Vec<f64> = Vec::new();
    let mut betas: Vec<f64> = Vec::new();
    let mut value = Vec::new();
    let mut termination = Termination::MaxSteps;

    for j in 1..=cap {
        let step = |dec: &mut KrylovDecomposition,
                    images: &mut Vec<Vec<f64>>,
                    alphas: &mut Vec<f64>,
                    betas: &mut Vec<f64>,
                    tracker: &mut Tracker|
         -> Result<(Option<Vec<f64>>, bool)> {
            let aq = a.matvec(&dec.basis[j - 1])?;
            let (mut w, stats) = cg_solve(b, &aq, &cfg.cg)?;
            tracker.solves().record(&stats);
            // B w = A q, so |w|_B^2 = w^T A q
            let w_norm = dot(&w, &aq).max(0.0).sqrt();
            let mut coeffs = vec![0.0; j];
            for _pass in 0..2 {
                for i in 0..j {
                    let h = dot(&images[i], &w);
                    axpy(-h, &dec.basis[i], &mut w);
                    coeffs[i] += h;
                }
            }
            let bw = b.matvec(&w)?;
            let beta2 = dot(&w, &bw);
            if beta2 < 0.0 {
                return Err(Error::NotPositiveDefinite {
                    context: "B-norm in Lanczos",
                    value: beta2,
                });
            }
            let beta = beta2.sqrt();
            let breakdown = beta <= BREAKDOWN_TOL * w_norm || beta == 0.0;
            alphas.push(coeffs[j - 1]);
            let mut h = coeffs;
            h.push(beta);
            let next = (!breakdown).then(|| {
                images.push(bw.iter().map(|x| x / beta).collect());
                w.iter().map(|x| x / beta).collect()
            });
            dec.push(h, None, Pole::Infinity, next);

            let approx = if tracker.wants_every_step() || j == cap || breakdown {
                let t = SymTridiagonal::new(alphas.clone(), betas.clone())?;
                let eig = sym_eig(&t)?;
                if eig.min() <= 0.0 {
                    return Err(Error::NotPositiveDefinite {
                        context: "Lanczos tridiagonal",
                        value: eig.min(),
                    });
                }
                let y = eig.map_first_column(f64::sqrt);
                let mut x = vec![0.0; n];
                for (img, yi) in images.iter().zip(&y) {
                    axpy(yi * v_norm, img, &mut x);
                }
                Some(x)
            } else {
                None
            };
            betas.push(beta);
            Ok((approx, breakdown))
        };
        let (approx, breakdown) =
            step(&mut dec, &mut images, &mut alphas, &mut betas, &mut tracker)
                .map_err(|e| e.at_step(j))?;
        let done = tracker.step(Pole::Infinity, approx.as_deref());
        if let Some(x) = approx {
            value = x;
        }
        if breakdown {
            termination = Termination::Breakdown;
            break;
        }
        if done {
            termination = Termination::Converged;
            break;
        }
    }
    Ok(GeomeanOutput {
        value,
        report: tracker.finish(termination),
        decomposition: dec,
    })
}
