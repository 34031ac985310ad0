//! The pencils the harness knows how to build or load.

use std::fmt;
use std::path::PathBuf;

use geomean::sparse::{
    lap1d, lap2d, random_spd, random_spd_with_condition, read_matrix_market, read_vector,
    SparseMatrix,
};

use crate::{CliError, Result};

#[derive(Debug, Clone, PartialEq)]
pub enum Problem {
    /// `A = lap1d(n)`, `B = lap2d(sqrt n)`, `v` all ones. `n` must be a square.
    Lap { size: usize },
    /// `M^T M + n I` pair from seeds `seed` and `seed + 1`, `v` all ones.
    Random { size: usize, seed: u64 },
    /// Prescribed-condition pair from seeds `seed` and `seed + 1`, `v` all ones.
    RandomCond {
        size: usize,
        condition: f64,
        seed: u64,
    },
    Files {
        a: PathBuf,
        b: PathBuf,
        v: Option<PathBuf>,
    },
}

#[derive(Debug, Clone)]
pub struct Pencil {
    pub a: SparseMatrix,
    pub b: SparseMatrix,
    pub v: Vec<f64>,
}

impl Pencil {
    pub fn dim(&self) -> usize {
        self.v.len()
    }
}

/// Grid side `k` with `k * k == size`.
pub fn grid_side(size: usize) -> Result<usize> {
    let k = (size as f64).sqrt().round() as usize;
    if k == 0 || k * k != size {
        return Err(CliError::Usage(format!(
            "size {size} is not a perfect square, so it has no 2D Laplacian grid"
        )));
    }
    Ok(k)
}

impl Problem {
    pub fn load(&self) -> Result<Pencil> {
        let (a, b, v) = match self {
            Problem::Lap { size } => {
                let k = grid_side(*size)?;
                (lap1d(*size)?, lap2d(k)?, None)
            }
            Problem::Random { size, seed } => (
                random_spd(*size, *seed)?,
                random_spd(*size, seed + 1)?,
                None,
            ),
            Problem::RandomCond {
                size,
                condition,
                seed,
            } => (
                random_spd_with_condition(*size, *condition, *seed)?,
                random_spd_with_condition(*size, *condition, seed + 1)?,
                None,
            ),
            Problem::Files { a, b, v } => (
                read_matrix_market(a)?,
                read_matrix_market(b)?,
                v.as_ref().map(read_vector).transpose()?,
            ),
        };
        let n = a.n_rows();
        if b.n_rows() != n || !a.is_square() || !b.is_square() {
            return Err(CliError::Usage(format!(
                "A is {}x{} but B is {}x{}",
                a.n_rows(),
                a.n_cols(),
                b.n_rows(),
                b.n_cols()
            )));
        }
        let v = v.unwrap_or_else(|| vec![1.0; n]);
        if v.len() != n {
            return Err(CliError::Usage(format!(
                "v has {} entries but A is {n}x{n}",
                v.len()
            )));
        }
        Ok(Pencil { a, b, v })
    }
}

impl fmt::Display for Problem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Problem::Lap { size } => write!(
                f,
                "lap1d({size}) / lap2d({}), v = ones",
                (*size as f64).sqrt() as usize
            ),
            Problem::Random { size, seed } => {
                write!(f, "random-spd n={size} seeds {seed},{}, v = ones", seed + 1)
            }
            Problem::RandomCond {
                size,
                condition,
                seed,
            } => write!(
                f,
                "random-spd-cond n={size} condition={condition} seeds {seed},{}, v = ones",
                seed + 1
            ),
            Problem::Files { a, b, v } => match v {
                Some(v) => write!(f, "A={} B={} v={}", a.display(), b.display(), v.display()),
                None => write!(f, "A={} B={} v = ones", a.display(), b.display()),
            },
        }
    }
}
