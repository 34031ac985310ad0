//! Harness around `geomean`: matrix generation, convergence tables,
//! timing benchmarks and dense reference vectors.

pub mod commands;
pub mod method;
pub mod problem;

pub use commands::{
    cmd_bench, cmd_gen, cmd_oracle, cmd_run, reference_for, BenchRecord, BenchSpec, GenKind,
    Reference, RunSpec,
};
pub use method::{execute, Method, MethodRun, RunOptions};
pub use problem::{Pencil, Problem};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error(transparent)]
    Core(#[from] geomean::Error),

    #[error("i/o: {0}")]
    Io(#[from] std::io::Error),

    #[error("csv: {0}")]
    Csv(#[from] csv::Error),

    #[error("{0}")]
    Usage(String),

    #[error("numerical failure: {0}")]
    Numerical(String),
}

pub type Result<T> = std::result::Result<T, CliError>;
