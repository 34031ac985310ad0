use super::{
    check_inputs, GeomeanConfig, GeomeanOutput, InnerKind, KrylovDecomposition, Orientation,
    Termination, Tracker,
};
use crate::dense::{db_sqrt_general, mgs_orthogonalize, ritz_values, small_solve, Euclidean};
use crate::error::{Error, Result};
use crate::poles::{FixedPoles, Pole, PoleStrategy};
use crate::solvers::{cg_solve, solve_spd_pencil, SolveStats};
use crate::sparse::SparseMatrix;
use crate::vector::{combine, dot, norm2};

const RITZ_COINCIDENCE: f64 = 1e-12;
const RESAMPLE_TRIES: usize = 3;

/// Polynomial Arnoldi: Euclidean basis of `K(B^{-1}A, v)` and result
/// `A Q H^{-1/2} e_1 |v|`. With [`Orientation::Swapped`] it runs on
/// `A^{-1}B` and returns `A Q H^{1/2} e_1 |v|`.
pub fn arnoldi_geomean(
    a: &SparseMatrix,
    b: &SparseMatrix,
    v: &[f64],
    cfg: &GeomeanConfig,
    reference: Option<&[f64]>,
) -> Result<GeomeanOutput> {
    let mut poles = FixedPoles::polynomial();
    match cfg.orientation {
        Orientation::Standard => run(a, b, a, v, &mut poles, cfg, reference, "arnoldi", false),
        Orientation::Swapped => run(b, a, a, v, &mut poles, cfg, reference, "arnoldi", true),
    }
}

/// Rational Arnoldi with poles pulled from `strategy`; result
/// `A V (H K^{-1})^{-1/2} e_1 |v|`.
pub fn rational_arnoldi_geomean(
    a: &SparseMatrix,
    b: &SparseMatrix,
    v: &[f64],
    strategy: &mut dyn PoleStrategy,
    cfg: &GeomeanConfig,
    reference: Option<&[f64]>,
) -> Result<GeomeanOutput> {
    let name = format!("rat-{}", strategy.name());
    run(a, b, a, v, strategy, cfg, reference, &name, false)
}

/// How a step's new direction was produced.
enum Continuation {
    /// `(B - A/xi) x = A v_j`; `inv_xi = 0` for an infinite pole.
    Numerator { inv_xi: f64 },
    /// `(A - xi B) x = B v_j`
    Denominator { xi: f64 },
}

/// Shared driver on the pencil `num - z den`, i.e. the operator `den^{-1} num`.
/// `outer` multiplies the final combination; `plus_half` selects the `+1/2`
/// power of the projected matrix instead of `-1/2`.
#[allow(clippy::too_many_arguments)]
fn run(
    num: &SparseMatrix,
    den: &SparseMatrix,
    outer: &SparseMatrix,
    v: &[f64],
    strategy: &mut dyn PoleStrategy,
    cfg: &GeomeanConfig,
    reference: Option<&[f64]>,
    method: &str,
    plus_half: bool,
) -> Result<GeomeanOutput> {
    check_inputs(num, den, v, cfg)?;
    let n = v.len();
    let cap = cfg.max_steps.min(n);
    let mut tracker = Tracker::new(method, cfg, reference)?;
    let v_norm = norm2(v);
    let v1: Vec<f64> = v.iter().map(|x| x / v_norm).collect();
    // magnitude of the pencil spectrum seen from v, used to pick the better
    // conditioned of the two equivalent solves for a finite pole
    let scale = dot(&v1, &num.matvec(&v1)?) / dot(&v1, &den.matvec(&v1)?);
    if !(scale > 0.0 && scale.is_finite()) {
        return Err(Error::NotPositiveDefinite {
            context: "pencil Rayleigh quotient of the starting vector",
            value: scale,
        });
    }
    let mut dec = KrylovDecomposition::new(v1, true, InnerKind::Euclidean, plus_half);
    let mut ritz: Vec<f64> = Vec::new();
    let mut value = Vec::new();
    let mut termination = Termination::MaxSteps;

    for j in 1..=cap {
        let mut step = || -> Result<(Pole, Option<Vec<f64>>, bool)> {
            let mut pole = strategy.next_pole(j, &ritz)?;
            let mut tries = 0;
            while let Pole::Finite(xi) = pole {
                if !ritz
                    .iter()
                    .any(|t| (xi - t).abs() <= RITZ_COINCIDENCE * t.abs())
                {
                    break;
                }
                tries += 1;
                if tries > RESAMPLE_TRIES {
                    return Err(Error::InvalidParameter(format!(
                        "pole {xi:e} keeps coinciding with a Ritz value"
                    )));
                }
                pole = strategy.resample(j, pole, &ritz)?;
            }

            let vj = &dec.basis[j - 1];
            let (x, stats, cont) = continuation(num, den, vj, pole, scale, cfg)?;
            tracker.solves().record(&stats);
            let o = mgs_orthogonalize(&x, &dec.basis, &Euclidean)?;
            let mut h = o.coeffs;
            h.push(o.residual_norm);
            let (hcol, kcol) = match cont {
                Continuation::Numerator { inv_xi } => {
                    let mut k: Vec<f64> = h.iter().map(|x| x * inv_xi).collect();
                    k[j - 1] += 1.0;
                    (h, k)
                }
                Continuation::Denominator { xi } => {
                    let mut hh: Vec<f64> = h.iter().map(|x| x * xi).collect();
                    hh[j - 1] += 1.0;
                    (hh, h)
                }
            };
            let breakdown = o.unit_residual.is_none();
            dec.push(hcol, Some(kcol), pole, o.unit_residual);

            let hm = dec.h().top_left(j, j);
            let km = dec.k().expect("rational decomposition").top_left(j, j);
            // A_m = H_m K_m^{-1}, via K_m^T A_m^T = H_m^T
            let am = small_solve(&km.transpose(), &hm.transpose())?.transpose();
            let eig = ritz_values(&am)?;
            let top = eig.iter().map(|z| z.re.abs()).fold(0.0, f64::max);
            if eig.iter().any(|z| z.im.abs() > 1e-6 * top) {
                log::warn!(
                    "step {j}: Ritz values with imaginary parts above 1e-6 of the spectral scale"
                );
            }
            ritz = eig.iter().map(|z| z.re).collect();

            let approx = if tracker.wants_every_step() || j == cap || breakdown {
                // the Euclidean projection of a non-self-adjoint operator can
                // leave the right half-plane; no principal root exists then
                if let Some(z) = eig.iter().find(|z| z.re <= 0.0 && z.im.abs() <= 1e-6 * top) {
                    return Err(Error::NotPositiveDefinite {
                        context:
                            "projected matrix has an eigenvalue on the closed negative real axis",
                        value: z.re,
                    });
                }
                let (root, inv_root) = db_sqrt_general(&am)?;
                let f = if plus_half { root } else { inv_root };
                let y: Vec<f64> = f.column(0).iter().map(|c| c * v_norm).collect();
                Some(outer.matvec(&combine(&dec.basis[..j], &y))?)
            } else {
                None
            };
            Ok((pole, approx, breakdown))
        };
        let (pole, approx, breakdown) = step().map_err(|e| e.at_step(j))?;
        let done = tracker.step(pole, approx.as_deref());
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

/// Next direction for pole `pole`. Finite poles with `|xi| >= scale` and the
/// infinite pole solve `(B - A/xi) x = A v_j`; zero and small poles solve
/// `(A - xi B) x = B v_j`, which avoids the cancellation `A/xi` would cause.
fn continuation(
    num: &SparseMatrix,
    den: &SparseMatrix,
    vj: &[f64],
    pole: Pole,
    scale: f64,
    cfg: &GeomeanConfig,
) -> Result<(Vec<f64>, SolveStats, Continuation)> {
    Ok(match pole {
        Pole::Infinity => {
            let (x, s) = cg_solve(den, &num.matvec(vj)?, &cfg.cg)?;
            (x, s, Continuation::Numerator { inv_xi: 0.0 })
        }
        Pole::Finite(xi) if xi.abs() >= scale => {
            let rhs = num.matvec(vj)?;
            let (x, s) = solve_spd_pencil(-1.0 / xi, num, 1.0, den, &rhs, &cfg.cg)?;
            (x, s, Continuation::Numerator { inv_xi: 1.0 / xi })
        }
        Pole::Zero => {
            let (x, s) = cg_solve(num, &den.matvec(vj)?, &cfg.cg)?;
            (x, s, Continuation::Denominator { xi: 0.0 })
        }
        Pole::Finite(xi) => {
            let rhs = den.matvec(vj)?;
            let (x, s) = solve_spd_pencil(1.0, num, -xi, den, &rhs, &cfg.cg)?;
            (x, s, Continuation::Denominator { xi })
        }
    })
}
