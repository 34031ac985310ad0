//! Krylov approximations of `(A # B) v = A (B^{-1} A)^{-1/2} v`.
//!
//! The pencil operator `B^{-1} A` is never formed: every application is a
//! sparse product followed by a CG solve.

mod lanczos;
mod rational;

use std::time::Instant;

pub use lanczos::gen_lanczos_geomean;
pub use rational::{arnoldi_geomean, rational_arnoldi_geomean};

use crate::dense::DenseMatrix;
use crate::error::{Error, Result};
use crate::poles::Pole;
use crate::solvers::{CgConfig, SolveTotals};
use crate::sparse::SparseMatrix;
use crate::vector::{axpy, dot, norm2, sub};

/// Which operator the polynomial Arnoldi method runs on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Orientation {
    /// `B^{-1} A`, result `A Q H^{-1/2} e_1 |v|`.
    #[default]
    Standard,
    /// `A^{-1} B`, result `A Q H^{1/2} e_1 |v|`.
    Swapped,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GeomeanConfig {
    pub max_steps: usize,
    /// Successive-iterate stopping tolerance; `None` runs all steps.
    pub outer_tol: Option<f64>,
    pub cg: CgConfig,
    /// Keep every per-step approximation in the report.
    pub record_steps: bool,
    pub orientation: Orientation,
}

impl Default for GeomeanConfig {
    fn default() -> Self {
        GeomeanConfig {
            max_steps: 30,
            outer_tol: Some(1e-10),
            cg: CgConfig::default(),
            record_steps: false,
            orientation: Orientation::Standard,
        }
    }
}

impl GeomeanConfig {
    /// Exactly `steps` steps, no early stop, nothing recorded.
    pub fn fixed_steps(steps: usize) -> Self {
        GeomeanConfig {
            max_steps: steps,
            outer_tol: None,
            ..Default::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.max_steps == 0 {
            return Err(Error::InvalidParameter("max_steps must be >= 1".into()));
        }
        if let Some(t) = self.outer_tol {
            if !(t > 0.0) {
                return Err(Error::InvalidParameter(format!(
                    "outer tolerance must be positive, got {t}"
                )));
            }
        }
        self.cg.validate()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Termination {
    Converged,
    MaxSteps,
    Breakdown,
}

#[derive(Debug, Clone)]
pub struct MethodReport {
    pub method: String,
    pub steps: usize,
    pub per_step_approximations: Option<Vec<Vec<f64>>>,
    /// One entry per step when a reference was supplied, else empty.
    pub per_step_rel_error: Vec<f64>,
    /// Cumulative wall-clock seconds at the end of each step.
    pub per_step_seconds: Vec<f64>,
    pub inner_solves: SolveTotals,
    pub termination: Termination,
    pub poles: Vec<Pole>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InnerKind {
    Euclidean,
    BWeighted,
}

/// `A V K = B V H` (or `B V K = A V H` when `swapped`), with `K = [I; 0]` in
/// the polynomial case. Columns are stored as they were appended, so any
/// leading prefix is itself a valid decomposition.
#[derive(Debug, Clone)]
pub struct KrylovDecomposition {
    pub basis: Vec<Vec<f64>>,
    h_cols: Vec<Vec<f64>>,
    k_cols: Option<Vec<Vec<f64>>>,
    pub poles: Vec<Pole>,
    pub inner: InnerKind,
    pub swapped: bool,
}

impl KrylovDecomposition {
    fn new(first: Vec<f64>, rational: bool, inner: InnerKind, swapped: bool) -> Self {
        KrylovDecomposition {
            basis: vec![first],
            h_cols: Vec::new(),
            k_cols: rational.then(Vec::new),
            poles: Vec::new(),
            inner,
            swapped,
        }
    }

    pub fn steps(&self) -> usize {
        self.h_cols.len()
    }

    pub fn is_rational(&self) -> bool {
        self.k_cols.is_some()
    }

    fn cols_to_matrix(cols: &[Vec<f64>], rows: usize) -> DenseMatrix {
        DenseMatrix::from_fn(rows, cols.len(), |i, j| {
            cols[j].get(i).copied().unwrap_or(0.0)
        })
    }

    /// `(m+1) x m` upper Hessenberg `H`.
    pub fn h(&self) -> DenseMatrix {
        Self::cols_to_matrix(&self.h_cols, self.steps() + 1)
    }

    /// `(m+1) x m` matrix `K`, `None` for polynomial decompositions.
    pub fn k(&self) -> Option<DenseMatrix> {
        self.k_cols
            .as_ref()
            .map(|k| Self::cols_to_matrix(k, self.steps() + 1))
    }

    /// The decomposition after `m` steps.
    pub fn prefix(&self, m: usize) -> KrylovDecomposition {
        let m = m.min(self.steps());
        KrylovDecomposition {
            basis: self.basis.iter().take(m + 1).cloned().collect(),
            h_cols: self.h_cols[..m].to_vec(),
            k_cols: self.k_cols.as_ref().map(|k| k[..m].to_vec()),
            poles: self.poles.iter().take(m).copied().collect(),
            inner: self.inner,
            swapped: self.swapped,
        }
    }

    fn push(&mut self, h: Vec<f64>, k: Option<Vec<f64>>, pole: Pole, next: Option<Vec<f64>>) {
        self.h_cols.push(h);
        if let (Some(cols), Some(k)) = (self.k_cols.as_mut(), k) {
            cols.push(k);
        }
        self.poles.push(pole);
        if let Some(q) = next {
            self.basis.push(q);
        }
    }

    /// Largest entry of `|V^T W V - I|`, `W` being `I` or `B`.
    pub fn orthonormality_loss(&self, b: Option<&SparseMatrix>) -> Result<f64> {
        let images: Vec<Vec<f64>> = match (self.inner, b) {
            (InnerKind::BWeighted, Some(b)) => self
                .basis
                .iter()
                .map(|q| b.matvec(q))
                .collect::<Result<_>>()?,
            (InnerKind::BWeighted, None) => {
                return Err(Error::InvalidParameter(
                    "B-orthonormal basis needs B for the Gram check".into(),
                ))
            }
            (InnerKind::Euclidean, _) => self.basis.clone(),
        };
        let mut worst: f64 = 0.0;
        for (i, qi) in self.basis.iter().enumerate() {
            for (j, wj) in images.iter().enumerate() {
                let target = if i == j { 1.0 } else { 0.0 };
                worst = worst.max((dot(qi, wj) - target).abs());
            }
        }
        Ok(worst)
    }
}

/// `||curr - prev|| <= tol ||curr||`
pub fn converged(prev: &[f64], curr: &[f64], tol: f64) -> bool {
    norm2(&sub(curr, prev)) <= tol * norm2(curr)
}

/// Relative Frobenius residual of the pencil relation,
/// `||A V K - B V H|| / (||A|| ||V K|| + ||B|| ||V H||)`.
pub fn decomposition_residual(
    dec: &KrylovDecomposition,
    a: &SparseMatrix,
    b: &SparseMatrix,
) -> Result<f64> {
    let (left, right) = if dec.swapped { (b, a) } else { (a, b) };
    let m = dec.steps();
    if m == 0 {
        return Ok(0.0);
    }
    let h = dec.h();
    let k = dec
        .k()
        .unwrap_or_else(|| DenseMatrix::from_fn(m + 1, m, |i, j| if i == j { 1.0 } else { 0.0 }));
    let n = dec.basis[0].len();
    let rows = dec.basis.len().min(m + 1);
    let mut res2 = 0.0;
    let mut vk2 = 0.0;
    let mut vh2 = 0.0;
    for j in 0..m {
        let mut vk = vec![0.0; n];
        let mut vh = vec![0.0; n];
        for i in 0..rows {
            axpy(k[(i, j)], &dec.basis[i], &mut vk);
            axpy(h[(i, j)], &dec.basis[i], &mut vh);
        }
        let r = sub(&left.matvec(&vk)?, &right.matvec(&vh)?);
        res2 += dot(&r, &r);
        vk2 += dot(&vk, &vk);
        vh2 += dot(&vh, &vh);
    }
    let scale = left.frobenius_norm() * vk2.sqrt() + right.frobenius_norm() * vh2.sqrt();
    Ok(if scale == 0.0 {
        0.0
    } else {
        res2.sqrt() / scale
    })
}

/// Bookkeeping shared by the three methods.
pub(crate) struct Tracker<'r> {
    start: Instant,
    reference: Option<(&'r [f64], f64)>,
    outer_tol: Option<f64>,
    record: bool,
    report: MethodReport,
    prev: Option<Vec<f64>>,
}

impl<'r> Tracker<'r> {
    pub(crate) fn new(
        method: &str,
        cfg: &GeomeanConfig,
        reference: Option<&'r [f64]>,
    ) -> Result<Self> {
        let reference = match reference {
            Some(r) => {
                let nr = norm2(r);
                if nr == 0.0 {
                    return Err(Error::ZeroReference);
                }
                Some((r, nr))
            }
            None => None,
        };
        Ok(Tracker {
            start: Instant::now(),
            reference,
            outer_tol: cfg.outer_tol,
            record: cfg.record_steps,
            report: MethodReport {
                method: method.to_string(),
                steps: 0,
                per_step_approximations: cfg.record_steps.then(Vec::new),
                per_step_rel_error: Vec::new(),
                per_step_seconds: Vec::new(),
                inner_solves: SolveTotals::default(),
                termination: Termination::MaxSteps,
                poles: Vec::new(),
            },
            prev: None,
        })
    }

    /// Whether step approximations are needed before the final step.
    pub(crate) fn wants_every_step(&self) -> bool {
        self.record || self.reference.is_some() || self.outer_tol.is_some()
    }

    pub(crate) fn solves(&mut self) -> &mut SolveTotals {
        &mut self.report.inner_solves
    }

    /// Records step `report.steps + 1`. Returns true if the outer criterion is met.
    pub(crate) fn step(&mut self, pole: Pole, approx: Option<&[f64]>) -> bool {
        self.report.steps += 1;
        self.report.poles.push(pole);
        self.report
            .per_step_seconds
            .push(self.start.elapsed().as_secs_f64());
        let Some(x) = approx else {
            return false;
        };
        if let Some((r, nr)) = self.reference {
            self.report.per_step_rel_error.push(norm2(&sub(x, r)) / nr);
        }
        if let Some(list) = self.report.per_step_approximations.as_mut() {
            list.push(x.to_vec());
        }
        let done = match (&self.prev, self.outer_tol) {
            (Some(p), Some(tol)) => converged(p, x, tol),
            _ => false,
        };
        self.prev = Some(x.to_vec());
        done
    }

    pub(crate) fn finish(mut self, termination: Termination) -> MethodReport {
        self.report.termination = termination;
        self.report
    }
}

/// Shared argument checks.
pub(crate) fn check_inputs(
    a: &SparseMatrix,
    b: &SparseMatrix,
    v: &[f64],
    cfg: &GeomeanConfig,
) -> Result<()> {
    cfg.validate()?;
    for (m, name) in [(a, "A"), (b, "B")] {
        if !m.is_square() {
            return Err(Error::DimensionMismatch {
                context: if name == "A" {
                    "A must be square"
                } else {
                    "B must be square"
                },
                expected: m.n_rows(),
                found: m.n_cols(),
            });
        }
        if !m.is_symmetric() {
            return Err(Error::NotSymmetric);
        }
    }
    if a.n_rows() != b.n_rows() {
        return Err(Error::DimensionMismatch {
            context: "A and B",
            expected: a.n_rows(),
            found: b.n_rows(),
        });
    }
    if v.len() != a.n_rows() {
        return Err(Error::DimensionMismatch {
            context: "starting vector",
            expected: a.n_rows(),
            found: v.len(),
        });
    }
    if !crate::vector::all_finite(v) {
        return Err(Error::NonFinite("starting vector"));
    }
    if norm2(v) == 0.0 {
        return Err(Error::InvalidParameter("starting vector is zero".into()));
    }
    Ok(())
}

/// Result of one method run.
#[derive(Debug, Clone)]
pub struct GeomeanOutput {
    pub value: Vec<f64>,
    pub report: MethodReport,
    pub decomposition: KrylovDecomposition,
}
