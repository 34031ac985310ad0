#![allow(dead_code)]

use geomean::krylov::{
    arnoldi_geomean, gen_lanczos_geomean, rational_arnoldi_geomean, GeomeanConfig, GeomeanOutput,
    Orientation,
};
use geomean::poles::StrategyKind;
use geomean::solvers::extreme_pencil_eigs;
use geomean::sparse::SparseMatrix;
use geomean::Result;

pub const METHODS: [&str; 7] = [
    "genlanczos",
    "arnoldi",
    "arnoldi-swapped",
    "rat-poly",
    "rat-extended",
    "rat-leja",
    "rat-adaptive",
];

pub const RATIONAL: [&str; 4] = ["rat-poly", "rat-extended", "rat-leja", "rat-adaptive"];

pub fn run(
    method: &str,
    a: &SparseMatrix,
    b: &SparseMatrix,
    v: &[f64],
    cfg: &GeomeanConfig,
    reference: Option<&[f64]>,
) -> Result<GeomeanOutput> {
    match method {
        "genlanczos" => gen_lanczos_geomean(a, b, v, cfg, reference),
        "arnoldi" => arnoldi_geomean(a, b, v, cfg, reference),
        "arnoldi-swapped" => {
            let cfg = GeomeanConfig {
                orientation: Orientation::Swapped,
                ..*cfg
            };
            arnoldi_geomean(a, b, v, &cfg, reference)
        }
        other => {
            let kind: StrategyKind = other.trim_start_matches("rat-").parse()?;
            let bounds = if kind.needs_bounds() {
                Some(extreme_pencil_eigs(a, b, 1e-6)?)
            } else {
                None
            };
            let mut strategy = kind.build(cfg.max_steps, bounds.as_ref())?;
            rational_arnoldi_geomean(a, b, v, strategy.as_mut(), cfg, reference)
        }
    }
}

/// Deterministic, sign-varying starting vector.
pub fn start_vector(n: usize) -> Vec<f64> {
    (0..n)
        .map(|i| 1.0 + 0.5 * ((i * 7 + 3) as f64).sin())
        .collect()
}
