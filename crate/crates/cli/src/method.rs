//! Method names as used on the command line, and a uniform way to run them.

use std::fmt;
use std::str::FromStr;
use std::time::Instant;

use geomean::baselines::{dense_geomean, gauss_chebyshev_geomean, relative_error};
use geomean::krylov::{
    arnoldi_geomean, gen_lanczos_geomean, rational_arnoldi_geomean, GeomeanConfig, GeomeanOutput,
    KrylovDecomposition,
};
use geomean::poles::{Pole, StrategyKind};
use geomean::solvers::{extreme_pencil_eigs, CgConfig, SolveTotals};
use geomean::sparse::SparseMatrix;

use crate::{CliError, Result};

/// Accuracy requested from the power iteration that brackets the spectrum.
pub const BOUNDS_TOL: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Method {
    GenLanczos,
    Arnoldi,
    Rational(StrategyKind),
    Quadrature,
    Dense,
}

impl Method {
    pub const ALL: [Method; 8] = [
        Method::GenLanczos,
        Method::Arnoldi,
        Method::Rational(StrategyKind::Poly),
        Method::Rational(StrategyKind::Extended),
        Method::Rational(StrategyKind::Leja),
        Method::Rational(StrategyKind::Adaptive),
        Method::Quadrature,
        Method::Dense,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            Method::GenLanczos => "genlanczos",
            Method::Arnoldi => "arnoldi",
            Method::Rational(StrategyKind::Poly) => "rat-poly",
            Method::Rational(StrategyKind::Extended) => "rat-extended",
            Method::Rational(StrategyKind::Leja) => "rat-leja",
            Method::Rational(StrategyKind::Adaptive) => "rat-adaptive",
            Method::Quadrature => "quadrature",
            Method::Dense => "dense",
        }
    }

    pub fn is_krylov(&self) -> bool {
        matches!(
            self,
            Method::GenLanczos | Method::Arnoldi | Method::Rational(_)
        )
    }

    /// Label for methods that substitute for a competitor we do not implement.
    pub fn stand_in(&self) -> Option<&'static str> {
        match self {
            Method::Dense => Some(
                "dense: spectral dense evaluation, standing in for a Schur-based direct method",
            ),
            Method::Quadrature => {
                Some("quadrature: Gauss-Chebyshev rule, standing in for a minimax rational method")
            }
            _ => None,
        }
    }

    fn needs_bounds(&self) -> bool {
        matches!(
            self,
            Method::Quadrature | Method::Rational(StrategyKind::Leja)
        )
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Method {
    type Err = CliError;

    fn from_str(s: &str) -> Result<Self> {
        Method::ALL
            .into_iter()
            .find(|m| m.name() == s)
            .ok_or_else(|| {
                let names: Vec<&str> = Method::ALL.iter().map(|m| m.name()).collect();
                CliError::Usage(format!(
                    "unknown method '{s}' (expected one of {})",
                    names.join(", ")
                ))
            })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RunOptions {
    /// Krylov steps, or quadrature nodes.
    pub steps: usize,
    /// Early-stop tolerance for the Krylov methods; `None` runs every step.
    pub outer_tol: Option<f64>,
    pub cg: CgConfig,
}

impl Default for RunOptions {
    fn default() -> Self {
        RunOptions {
            steps: 30,
            outer_tol: None,
            cg: CgConfig::default(),
        }
    }
}

impl RunOptions {
    pub fn validate(&self) -> Result<()> {
        if self.steps == 0 {
            return Err(CliError::Usage("--steps must be at least 1".into()));
        }
        self.krylov_config(false).validate()?;
        Ok(())
    }

    fn krylov_config(&self, record: bool) -> GeomeanConfig {
        GeomeanConfig {
            max_steps: self.steps,
            outer_tol: self.outer_tol,
            cg: self.cg,
            record_steps: record,
            ..Default::default()
        }
    }
}

/// What one method run produced.
#[derive(Debug, Clone)]
pub struct MethodRun {
    pub method: Method,
    pub value: Vec<f64>,
    /// Steps executed (quadrature: nodes; dense: 1).
    pub steps: usize,
    /// One entry per reported step when a reference was supplied.
    pub rel_errors: Vec<f64>,
    /// Wall-clock seconds per reported step, setup included, cumulative
    /// for the Krylov methods.
    pub seconds: Vec<f64>,
    /// Wall-clock seconds around the whole call.
    pub total_seconds: f64,
    /// Time spent bracketing the pencil spectrum, part of every figure above.
    pub setup_seconds: f64,
    pub inner_solves: SolveTotals,
    pub poles: Vec<Pole>,
    pub decomposition: Option<KrylovDecomposition>,
}

/// Runs `method` on `(a, b, v)`.
///
/// With a reference every step is evaluated and its error recorded; the
/// quadrature then runs once for every node count `1..=steps`. Without one
/// only the final approximation is formed, which is what timings should use.
pub fn execute(
    method: Method,
    a: &SparseMatrix,
    b: &SparseMatrix,
    v: &[f64],
    opts: &RunOptions,
    reference: Option<&[f64]>,
) -> Result<MethodRun> {
    opts.validate()?;
    let start = Instant::now();
    let bounds = if method.needs_bounds() {
        Some(extreme_pencil_eigs(a, b, BOUNDS_TOL)?)
    } else {
        None
    };
    let setup = start.elapsed().as_secs_f64();

    let mut run = MethodRun {
        method,
        value: Vec::new(),
        steps: 0,
        rel_errors: Vec::new(),
        seconds: Vec::new(),
        total_seconds: 0.0,
        setup_seconds: setup,
        inner_solves: SolveTotals::default(),
        poles: Vec::new(),
        decomposition: None,
    };

    match method {
        Method::Dense => {
            let value = dense_geomean(a, b)?.matvec(v);
            run.steps = 1;
            run.seconds.push(start.elapsed().as_secs_f64());
            if let Some(r) = reference {
                run.rel_errors.push(relative_error(&value, r)?);
            }
            run.value = value;
        }
        Method::Quadrature => {
            let bounds = bounds.expect("quadrature bounds");
            let counts = if reference.is_some() {
                1..=opts.steps
            } else {
                opts.steps..=opts.steps
            };
            for count in counts {
                let t = Instant::now();
                let (value, totals) = gauss_chebyshev_geomean(a, b, v, count, &bounds, &opts.cg)?;
                run.seconds.push(setup + t.elapsed().as_secs_f64());
                run.inner_solves.merge(&totals);
                if let Some(r) = reference {
                    run.rel_errors.push(relative_error(&value, r)?);
                }
                run.value = value;
            }
            run.steps = opts.steps;
        }
        _ => {
            let cfg = opts.krylov_config(false);
            let out: GeomeanOutput = match method {
                Method::GenLanczos => gen_lanczos_geomean(a, b, v, &cfg, reference)?,
                Method::Arnoldi => arnoldi_geomean(a, b, v, &cfg, reference)?,
                Method::Rational(kind) => {
                    let mut strategy = kind.build(opts.steps, bounds.as_ref())?;
                    rational_arnoldi_geomean(a, b, v, strategy.as_mut(), &cfg, reference)?
                }
                Method::Quadrature | Method::Dense => unreachable!(),
            };
            run.steps = out.report.steps;
            run.rel_errors = out.report.per_step_rel_error;
            if reference.is_some() {
                run.seconds = out
                    .report
                    .per_step_seconds
                    .iter()
                    .map(|s| s + setup)
                    .collect();
            } else {
                run.seconds.push(start.elapsed().as_secs_f64());
            }
            run.inner_solves = out.report.inner_solves;
            run.poles = out.report.poles;
            run.decomposition = Some(out.decomposition);
            run.value = out.value;
        }
    }
    run.total_seconds = start.elapsed().as_secs_f64();
    if let Some(bad) = run.rel_errors.iter().find(|e| !e.is_finite()) {
        return Err(CliError::Numerical(format!(
            "{method}: relative error {bad}"
        )));
    }
    if run.inner_solves.unconverged > 0 {
        log::warn!(
            "{method}: {} of {} inner solves stopped short of the tolerance (worst residual {:e})",
            run.inner_solves.unconverged,
            run.inner_solves.solves,
            run.inner_solves.worst_relative_residual
        );
    }
    Ok(run)
}

#[cfg(test)]
mod tests {
    use super::*;
    use geomean::sparse::random_spd;

    #[test]
    fn names_round_trip() {
        for m in Method::ALL {
            assert_eq!(m.name().parse::<Method>().unwrap(), m);
        }
        assert!("rat-foo".parse::<Method>().is_err());
        assert!(Method::Dense.stand_in().is_some());
        assert!(Method::Arnoldi.stand_in().is_none());
    }

    #[test]
    fn every_method_runs_with_and_without_reference() {
        let a = random_spd(12, 1).unwrap();
        let b = random_spd(12, 2).unwrap();
        let v = vec![1.0; 12];
        let reference = dense_geomean(&a, &b).unwrap().matvec(&v);
        let opts = RunOptions {
            steps: 6,
            ..Default::default()
        };
        for m in Method::ALL {
            let with = execute(m, &a, &b, &v, &opts, Some(&reference)).unwrap();
            let expected_rows = if m == Method::Dense { 1 } else { 6 };
            assert_eq!(with.rel_errors.len(), expected_rows, "{m}");
            assert_eq!(with.seconds.len(), expected_rows, "{m}");
            assert!(with.seconds.windows(2).all(|w| w[0] <= w[1]) || m == Method::Quadrature);
            let without = execute(m, &a, &b, &v, &opts, None).unwrap();
            assert!(without.rel_errors.is_empty());
            assert_eq!(without.value, with.value, "{m}");
        }
    }

    #[test]
    fn zero_steps_rejected() {
        let a = random_spd(3, 1).unwrap();
        let opts = RunOptions {
            steps: 0,
            ..Default::default()
        };
        assert!(execute(Method::Arnoldi, &a, &a, &[1.0; 3], &opts, None).is_err());
    }
}
