use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use geomean::solvers::CgConfig;
use geomean_cli::{
    cmd_bench, cmd_gen, cmd_oracle, cmd_run, BenchSpec, CliError, GenKind, Method, Problem,
    RunOptions, RunSpec,
};

#[derive(Parser)]
#[command(
    name = "geomean",
    version,
    about = "Geometric mean of sparse SPD matrices applied to a vector"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum ProblemKind {
    /// lap1d(n) against lap2d(sqrt n)
    Lap,
    /// two seeded M^T M + n I matrices
    Random,
    /// two seeded matrices with prescribed condition number
    RandomCond,
    /// --a, --b and optionally --v
    Files,
}

#[derive(clap::Args)]
struct Numerics {
    /// Krylov steps, or quadrature nodes
    #[arg(long, default_value_t = 30)]
    steps: usize,
    /// Stop early once successive approximations agree to this relative tolerance
    #[arg(long)]
    tol: Option<f64>,
    /// Relative residual tolerance of the inner conjugate gradient solves
    #[arg(long, default_value_t = 1e-12)]
    cg_tol: f64,
}

impl Numerics {
    fn options(&self) -> RunOptions {
        RunOptions {
            steps: self.steps,
            outer_tol: self.tol,
            cg: CgConfig::with_tol(self.cg_tol),
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Write a test matrix in Matrix Market format
    Gen {
        /// lap1d, lap2d, random-spd or random-spd-cond
        kind: String,
        /// Order, or grid side for lap2d
        #[arg(long)]
        size: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Condition number for random-spd-cond
        #[arg(long, default_value_t = 100.0)]
        condition: f64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Per-step relative errors of one method as CSV
    Run {
        #[arg(long)]
        method: String,
        /// Pole strategy; `--method rat --poles leja` is the same as `--method rat-leja`
        #[arg(long)]
        poles: Option<String>,
        #[arg(long, value_enum, default_value = "lap")]
        problem: ProblemKind,
        #[arg(long, default_value_t = 1600)]
        size: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 50.0)]
        condition: f64,
        #[arg(long)]
        a: Option<PathBuf>,
        #[arg(long)]
        b: Option<PathBuf>,
        #[arg(long)]
        v: Option<PathBuf>,
        #[command(flatten)]
        numerics: Numerics,
        /// Output file; standard output when omitted
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Wall-clock comparison on the Laplacian pencil
    Bench {
        #[arg(long, value_delimiter = ',', default_value = "1600,2500,3600,4900")]
        size: Vec<usize>,
        #[arg(
            long,
            value_delimiter = ',',
            default_value = "rat-leja,rat-adaptive,dense,quadrature"
        )]
        method: Vec<String>,
        #[command(flatten)]
        numerics: Numerics,
        /// Run independent cells concurrently
        #[arg(long)]
        parallel: bool,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Dense reference (A # B) v, one value per line
    Oracle {
        #[arg(long)]
        a: PathBuf,
        #[arg(long)]
        b: PathBuf,
        #[arg(long)]
        v: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
}

fn resolve_method(method: &str, poles: Option<&str>) -> Result<Method, CliError> {
    match (method, poles) {
        ("rat", Some(p)) => format!("rat-{p}").parse(),
        ("rat", None) => Err(CliError::Usage("--method rat needs --poles".into())),
        (m, None) => m.parse(),
        (m, Some(p)) if m == format!("rat-{p}") => m.parse(),
        (m, Some(p)) => Err(CliError::Usage(format!(
            "--poles {p} does not apply to --method {m}"
        ))),
    }
}

fn output(path: Option<&PathBuf>) -> io::Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(File::create(p)?)),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

fn dispatch(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Gen {
            kind,
            size,
            seed,
            condition,
            out,
        } => {
            cmd_gen(kind.parse::<GenKind>()?, size, seed, condition, &out)?;
        }
        Command::Run {
            method,
            poles,
            problem,
            size,
            seed,
            condition,
            a,
            b,
            v,
            numerics,
            out,
        } => {
            let problem = match problem {
                ProblemKind::Lap => Problem::Lap { size },
                ProblemKind::Random => Problem::Random { size, seed },
                ProblemKind::RandomCond => Problem::RandomCond {
                    size,
                    condition,
                    seed,
                },
                ProblemKind::Files => match (a, b) {
                    (Some(a), Some(b)) => Problem::Files { a, b, v },
                    _ => return Err(CliError::Usage("--problem files needs --a and --b".into())),
                },
            };
            let spec = RunSpec {
                method: resolve_method(&method, poles.as_deref())?,
                problem,
                opts: numerics.options(),
            };
            let mut w = output(out.as_ref())?;
            cmd_run(&spec, &mut w)?;
            w.flush()?;
        }
        Command::Bench {
            size,
            method,
            numerics,
            parallel,
            out,
        } => {
            let methods = method
                .iter()
                .map(|m| m.parse())
                .collect::<Result<Vec<Method>, _>>()?;
            let spec = BenchSpec {
                sizes: size,
                methods,
                opts: numerics.options(),
                parallel,
            };
            let mut w = output(out.as_ref())?;
            cmd_bench(&spec, &mut w)?;
            w.flush()?;
        }
        Command::Oracle { a, b, v, out } => {
            cmd_oracle(&a, &b, &v, &out)?;
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match dispatch(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("geomean: {e}");
            ExitCode::from(2)
        }
    }
}
