//! The four subcommands, written against `io::Write` so tests can capture them.

use std::io::Write;
use std::path::Path;
use std::str::FromStr;

use rayon::prelude::*;

use geomean::baselines::{dense_geomean, dense_guard, relative_error};
use geomean::poles::StrategyKind;
use geomean::sparse::{
    lap1d, lap2d, random_spd, random_spd_with_condition, write_matrix_market, write_vector,
};

use crate::method::{execute, Method, MethodRun, RunOptions};
use crate::problem::{Pencil, Problem};
use crate::{CliError, Result};

/// Above this order `run` and `bench` stop using the dense oracle as reference.
pub const DENSE_REFERENCE_LIMIT: usize = 2000;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GenKind {
    Lap1d,
    Lap2d,
    RandomSpd,
    RandomSpdCond,
}

impl FromStr for GenKind {
    type Err = CliError;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "lap1d" => GenKind::Lap1d,
            "lap2d" => GenKind::Lap2d,
            "random-spd" => GenKind::RandomSpd,
            "random-spd-cond" => GenKind::RandomSpdCond,
            other => {
                return Err(CliError::Usage(format!(
                    "unknown matrix kind '{other}' (expected lap1d, lap2d, random-spd or random-spd-cond)"
                )))
            }
        })
    }
}

/// Writes one Matrix Market file. For `lap2d`, `size` is the grid side.
pub fn cmd_gen(kind: GenKind, size: usize, seed: u64, condition: f64, out: &Path) -> Result<()> {
    let m = match kind {
        GenKind::Lap1d => lap1d(size)?,
        GenKind::Lap2d => lap2d(size)?,
        GenKind::RandomSpd => random_spd(size, seed)?,
        GenKind::RandomSpdCond => random_spd_with_condition(size, condition, seed)?,
    };
    write_matrix_market(&m, out)?;
    log::info!(
        "wrote {}x{} matrix with {} entries to {}",
        m.n_rows(),
        m.n_cols(),
        m.nnz(),
        out.display()
    );
    Ok(())
}

#[derive(Debug, Clone, PartialEq)]
pub struct Reference {
    pub value: Vec<f64>,
    pub source: String,
}

/// The dense oracle when the order allows it, otherwise adaptive rational
/// Arnoldi at twice the step count.
pub fn reference_for(pencil: &Pencil, opts: &RunOptions) -> Result<Reference> {
    let n = pencil.dim();
    if n <= DENSE_REFERENCE_LIMIT && n <= dense_guard() {
        return Ok(Reference {
            value: dense_geomean(&pencil.a, &pencil.b)?.matvec(&pencil.v),
            source: "dense oracle".into(),
        });
    }
    let steps = 2 * opts.steps;
    let tight = RunOptions {
        steps,
        outer_tol: None,
        ..*opts
    };
    let run = execute(
        Method::Rational(StrategyKind::Adaptive),
        &pencil.a,
        &pencil.b,
        &pencil.v,
        &tight,
        None,
    )?;
    Ok(Reference {
        value: run.value,
        source: format!("rat-adaptive at {steps} steps (order {n} is above the dense reference limit {DENSE_REFERENCE_LIMIT})"),
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunSpec {
    pub method: Method,
    pub problem: Problem,
    pub opts: RunOptions,
}

/// Convergence table `step,rel_error,seconds_cumulative` preceded by `#` lines.
pub fn cmd_run(spec: &RunSpec, out: &mut dyn Write) -> Result<MethodRun> {
    spec.opts.validate()?;
    let pencil = spec.problem.load()?;
    let reference = reference_for(&pencil, &spec.opts)?;
    let run = execute(
        spec.method,
        &pencil.a,
        &pencil.b,
        &pencil.v,
        &spec.opts,
        Some(&reference.value),
    )?;

    writeln!(out, "# method: {}", spec.method)?;
    writeln!(out, "# problem: {}", spec.problem)?;
    writeln!(out, "# reference: {}", reference.source)?;
    if let Some(label) = spec.method.stand_in() {
        writeln!(out, "# stand-in: {label}")?;
    }
    if spec.method == Method::Quadrature {
        writeln!(
            out,
            "# quadrature rows: step = node count, each row a separate evaluation timed on its own"
        )?;
    }
    let mut w = csv::Writer::from_writer(&mut *out);
    w.write_record(["step", "rel_error", "seconds_cumulative"])?;
    for (k, (err, secs)) in run.rel_errors.iter().zip(&run.seconds).enumerate() {
        w.write_record([
            (k + 1).to_string(),
            format!("{err:e}"),
            format!("{secs:.6}"),
        ])?;
    }
    w.flush()?;
    Ok(run)
}

#[derive(Debug, Clone, PartialEq)]
pub struct BenchSpec {
    /// Dimensions of the Laplacian pencil; each must be a perfect square.
    pub sizes: Vec<usize>,
    pub methods: Vec<Method>,
    pub opts: RunOptions,
    pub parallel: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BenchRecord {
    pub method: Method,
    pub dimension: usize,
    pub seconds: f64,
    pub rel_error_final: f64,
    pub steps: usize,
}

/// Times every (method, size) cell on `lap1d(n) / lap2d(sqrt n)` with `v`
/// all ones. Cells run concurrently with `parallel`; each stays single-threaded.
pub fn cmd_bench(spec: &BenchSpec, out: &mut dyn Write) -> Result<Vec<BenchRecord>> {
    spec.opts.validate()?;
    if spec.sizes.is_empty() || spec.methods.is_empty() {
        return Err(CliError::Usage(
            "bench needs at least one size and one method".into(),
        ));
    }
    let pencils = spec
        .sizes
        .iter()
        .map(|&size| Problem::Lap { size }.load())
        .collect::<Result<Vec<_>>>()?;
    let cells: Vec<(usize, Method)> = (0..pencils.len())
        .flat_map(|i| spec.methods.iter().map(move |&m| (i, m)))
        .collect();
    let run_cell = |&(i, m): &(usize, Method)| -> Result<MethodRun> {
        let p = &pencils[i];
        log::info!("bench: {m} at n = {}", p.dim());
        execute(m, &p.a, &p.b, &p.v, &spec.opts, None)
    };
    let runs: Vec<MethodRun> = if spec.parallel {
        cells.par_iter().map(run_cell).collect::<Result<_>>()?
    } else {
        cells.iter().map(run_cell).collect::<Result<_>>()?
    };

    let mut records = Vec::with_capacity(runs.len());
    let mut sources = Vec::new();
    for (i, pencil) in pencils.iter().enumerate() {
        let row: Vec<&MethodRun> = cells
            .iter()
            .zip(&runs)
            .filter(|((ci, _), _)| *ci == i)
            .map(|(_, r)| r)
            .collect();
        let reference = match row.iter().find(|r| r.method == Method::Dense) {
            Some(d) => Reference {
                value: d.value.clone(),
                source: "dense oracle".into(),
            },
            None => reference_for(pencil, &spec.opts)?,
        };
        sources.push(format!("n = {}: {}", pencil.dim(), reference.source));
        for r in row {
            let err = relative_error(&r.value, &reference.value)?;
            if !err.is_finite() {
                return Err(CliError::Numerical(format!(
                    "{} at n = {}: error {err}",
                    r.method,
                    pencil.dim()
                )));
            }
            records.push(BenchRecord {
                method: r.method,
                dimension: pencil.dim(),
                seconds: r.total_seconds,
                rel_error_final: err,
                steps: r.steps,
            });
        }
    }

    writeln!(out, "# problem: lap1d(n) / lap2d(sqrt n), v = ones")?;
    for s in &sources {
        writeln!(out, "# reference {s}")?;
    }
    for m in &spec.methods {
        if let Some(label) = m.stand_in() {
            writeln!(out, "# stand-in: {label}")?;
        }
    }
    let mut w = csv::Writer::from_writer(&mut *out);
    w.write_record(["method", "dimension", "seconds", "rel_error_final", "steps"])?;
    for r in &records {
        w.write_record([
            r.method.to_string(),
            r.dimension.to_string(),
            format!("{:.6}", r.seconds),
            format!("{:e}", r.rel_error_final),
            r.steps.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(records)
}

/// `dense_geomean(A, B) v` written one value per line.
pub fn cmd_oracle(a: &Path, b: &Path, v: &Path, out: &Path) -> Result<Vec<f64>> {
    let pencil = Problem::Files {
        a: a.to_path_buf(),
        b: b.to_path_buf(),
        v: Some(v.to_path_buf()),
    }
    .load()?;
    let x = dense_geomean(&pencil.a, &pencil.b)?.matvec(&pencil.v);
    write_vector(&x, out)?;
    Ok(x)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gen_kinds_parse() {
        assert_eq!("lap2d".parse::<GenKind>().unwrap(), GenKind::Lap2d);
        assert!("lap3d".parse::<GenKind>().is_err());
    }

    #[test]
    fn small_reference_is_dense() {
        let p = Problem::Random { size: 20, seed: 1 }.load().unwrap();
        let r = reference_for(&p, &RunOptions::default()).unwrap();
        assert_eq!(r.source, "dense oracle");
    }
}
