//! Pole sequences for rational Krylov spaces.
//!
//! Finite poles are strictly negative so every shifted pencil stays SPD;
//! zero and infinity are carried symbolically. All `|s(z)|` evaluations are
//! done as sums of logarithms.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::solvers::PencilSpectrumBounds;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Pole {
    Infinity,
    Zero,
    Finite(f64),
}

impl Pole {
    pub fn finite(value: f64) -> Result<Pole> {
        if value < 0.0 && value.is_finite() {
            Ok(Pole::Finite(value))
        } else {
            Err(Error::InvalidParameter(format!(
                "finite poles must be strictly negative, got {value}"
            )))
        }
    }

    /// Magnitude used for ordering; infinity is largest.
    pub fn magnitude(&self) -> f64 {
        match *self {
            Pole::Infinity => f64::INFINITY,
            Pole::Zero => 0.0,
            Pole::Finite(x) => x.abs(),
        }
    }

    /// `log|1 - z/xi|`, zero for the infinite pole. Not defined for the zero pole.
    fn log_factor(&self, z: f64) -> f64 {
        match *self {
            Pole::Finite(xi) => (1.0 - z / xi).abs().ln(),
            _ => 0.0,
        }
    }
}

impl fmt::Display for Pole {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Pole::Infinity => write!(f, "inf"),
            Pole::Zero => write!(f, "0"),
            Pole::Finite(x) => write!(f, "{x:e}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PoleSequence {
    pub poles: Vec<Pole>,
    pub strategy_name: String,
    pub sigma_nodes: Option<Vec<f64>>,
}

impl PoleSequence {
    pub fn len(&self) -> usize {
        self.poles.len()
    }

    pub fn is_empty(&self) -> bool {
        self.poles.is_empty()
    }
}

pub const DEFAULT_GRID_POINTS: usize = 1000;
pub const DEFAULT_RANGE_FACTOR: f64 = 1e8;
/// Candidates this close (relatively) to a node or earlier pole are skipped.
const COINCIDENCE_TOL: f64 = 1e-12;

/// Discretized condenser: nodes on the spectral interval, pole candidates on
/// the negative axis. Both lists ascending.
#[derive(Debug, Clone, PartialEq)]
pub struct CondenserGrid {
    pub sigma_candidates: Vec<f64>,
    pub xi_candidates: Vec<f64>,
}

impl CondenserGrid {
    pub fn new(lambda_min: f64, lambda_max: f64, points: usize, range_factor: f64) -> Result<Self> {
        if !(lambda_min > 0.0 && lambda_min <= lambda_max && lambda_max.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "invalid spectral interval [{lambda_min}, {lambda_max}]"
            )));
        }
        if points < 2 || !(range_factor >= 1.0) {
            return Err(Error::EmptyGrid);
        }
        let (a, b) = (lambda_min, lambda_max);
        let sigma_candidates = (0..points)
            .map(|k| {
                let t = (k as f64 * std::f64::consts::PI / (points - 1) as f64).cos();
                (0.5 * (a + b) - 0.5 * (b - a) * t).clamp(a, b)
            })
            .collect();
        let lo = (b * range_factor).ln();
        let hi = (a / range_factor).ln();
        let xi_candidates = (0..points)
            .map(|k| -(lo + (hi - lo) * k as f64 / (points - 1) as f64).exp())
            .collect();
        Ok(CondenserGrid {
            sigma_candidates,
            xi_candidates,
        })
    }

    pub fn from_bounds(bounds: &PencilSpectrumBounds) -> Result<Self> {
        Self::new(
            bounds.lambda_min,
            bounds.lambda_max,
            DEFAULT_GRID_POINTS,
            DEFAULT_RANGE_FACTOR,
        )
    }

    fn check(&self) -> Result<()> {
        if self.sigma_candidates.is_empty() || self.xi_candidates.is_empty() {
            return Err(Error::EmptyGrid);
        }
        Ok(())
    }
}

pub fn poles_polynomial(m: usize) -> Result<PoleSequence> {
    if m == 0 {
        return Err(Error::InvalidSize("pole sequence needs m >= 1"));
    }
    Ok(PoleSequence {
        poles: vec![Pole::Infinity; m],
        strategy_name: "poly".into(),
        sigma_nodes: None,
    })
}

/// `[inf, 0, inf, 0, ...]`
pub fn poles_extended(m: usize) -> Result<PoleSequence> {
    if m == 0 {
        return Err(Error::InvalidSize("pole sequence needs m >= 1"));
    }
    Ok(PoleSequence {
        poles: (0..m)
            .map(|j| {
                if j % 2 == 0 {
                    Pole::Infinity
                } else {
                    Pole::Zero
                }
            })
            .collect(),
        strategy_name: "extended".into(),
        sigma_nodes: None,
    })
}

/// Running values of `log|s(z)| = sum log|z - sigma_i| - sum log|1 - z/xi_i|`
/// over a candidate list.
#[derive(Debug, Clone)]
pub(crate) struct LogTable {
    pub(crate) z: Vec<f64>,
    pub(crate) value: Vec<f64>,
}

impl LogTable {
    pub(crate) fn new(z: &[f64]) -> Self {
        LogTable {
            z: z.to_vec(),
            value: vec![0.0; z.len()],
        }
    }

    pub(crate) fn add_node(&mut self, sigma: f64) {
        for (v, &z) in self.value.iter_mut().zip(&self.z) {
            *v += (z - sigma).abs().ln();
        }
    }

    pub(crate) fn add_pole(&mut self, xi: Pole) {
        for (v, &z) in self.value.iter_mut().zip(&self.z) {
            *v -= xi.log_factor(z);
        }
    }

    fn argmax(&self) -> Option<usize> {
        let mut best: Option<usize> = None;
        for (k, v) in self.value.iter().enumerate() {
            if v.is_nan() || *v == f64::NEG_INFINITY {
                continue;
            }
            if best.is_none_or(|b| *v > self.value[b]) {
                best = Some(k);
            }
        }
        best
    }

    fn argmin(&self) -> Option<usize> {
        let mut best: Option<usize> = None;
        for (k, v) in self.value.iter().enumerate() {
            if v.is_nan() || *v == f64::INFINITY {
                continue;
            }
            if best.is_none_or(|b| *v < self.value[b]) {
                best = Some(k);
            }
        }
        best
    }
}

/// Generalized Leja points: `m` nodes in the spectral interval and `m` poles
/// on the negative axis, chosen greedily over the grid.
pub fn leja_sequence(
    bounds: &PencilSpectrumBounds,
    m: usize,
    grid: &CondenserGrid,
) -> Result<PoleSequence> {
    if m == 0 {
        return Err(Error::InvalidSize("pole sequence needs m >= 1"));
    }
    grid.check()?;
    let first_sigma = bounds.lambda_min;
    let first_xi = *grid
        .xi_candidates
        .iter()
        .max_by(|a, b| a.total_cmp(b))
        .expect("non-empty grid");
    let mut sigma_table = LogTable::new(&grid.sigma_candidates);
    let mut xi_table = LogTable::new(&grid.xi_candidates);
    let mut nodes = vec![first_sigma];
    let mut poles = vec![Pole::finite(first_xi)?];
    while poles.len() < m {
        let sigma = *nodes.last().expect("non-empty");
        let xi = *poles.last().expect("non-empty");
        sigma_table.add_node(sigma);
        sigma_table.add_pole(xi);
        xi_table.add_node(sigma);
        xi_table.add_pole(xi);
        let ks = sigma_table.argmax().ok_or(Error::EmptyGrid)?;
        let kx = xi_table.argmin().ok_or(Error::EmptyGrid)?;
        nodes.push(grid.sigma_candidates[ks]);
        poles.push(Pole::finite(grid.xi_candidates[kx])?);
    }
    Ok(PoleSequence {
        poles,
        strategy_name: "leja".into(),
        sigma_nodes: Some(nodes),
    })
}

/// Outcome of one adaptive selection.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AdaptiveChoice {
    pub pole: Pole,
    /// Every candidate was excluded; `pole` is the middle candidate.
    pub degenerate: bool,
}

/// Minimizes `sum log|z - theta_k| - sum log|1 - z/xi|` over the pole
/// candidates, with `theta_k` the current Ritz values. Ties go to the
/// candidate of smallest magnitude.
pub fn adaptive_next_pole(
    ritz: &[f64],
    poles_so_far: &[Pole],
    grid: &CondenserGrid,
) -> Result<AdaptiveChoice> {
    grid.check()?;
    let mut order: Vec<usize> = (0..grid.xi_candidates.len()).collect();
    order.sort_by(|&a, &b| {
        grid.xi_candidates[a]
            .abs()
            .total_cmp(&grid.xi_candidates[b].abs())
    });
    let near = |z: f64, w: f64| (z - w).abs() <= COINCIDENCE_TOL * z.abs().max(w.abs());
    let mut best: Option<(f64, f64)> = None;
    for &k in &order {
        let z = grid.xi_candidates[k];
        let clashes = ritz.iter().any(|&t| near(z, t))
            || poles_so_far.iter().any(|p| match p {
                Pole::Finite(x) => near(z, *x),
                _ => false,
            });
        if clashes {
            continue;
        }
        let value: f64 = ritz.iter().map(|&t| (z - t).abs().ln()).sum::<f64>()
            - poles_so_far.iter().map(|p| p.log_factor(z)).sum::<f64>();
        if !value.is_finite() {
            continue;
        }
        if best.is_none_or(|(_, v)| value < v) {
            best = Some((z, value));
        }
    }
    match best {
        Some((z, _)) => Ok(AdaptiveChoice {
            pole: Pole::finite(z)?,
            degenerate: false,
        }),
        None => {
            let mid = grid.xi_candidates[grid.xi_candidates.len() / 2];
            log::warn!("adaptive pole selection degenerate; using middle candidate {mid:e}");
            Ok(AdaptiveChoice {
                pole: Pole::finite(mid)?,
                degenerate: true,
            })
        }
    }
}

/// Step 1 of the adaptive method has no Ritz values yet: use a polynomial step.
pub fn first_adaptive_pole(grid: &CondenserGrid) -> Pole {
    let _ = grid;
    Pole::Infinity
}

/// Pull interface used by rational Arnoldi. `step` is 1-based; `ritz` holds
/// the real parts of the current Ritz values (empty before step 1 finishes).
pub trait PoleStrategy {
    fn name(&self) -> &str;

    fn next_pole(&mut self, step: usize, ritz: &[f64]) -> Result<Pole>;

    /// Called when `rejected` coincides with a Ritz value.
    fn resample(&mut self, step: usize, rejected: Pole, ritz: &[f64]) -> Result<Pole> {
        let _ = (step, ritz);
        Err(Error::InvalidParameter(format!(
            "strategy '{}' cannot replace pole {rejected}",
            self.name()
        )))
    }

    /// Nodes chosen alongside the poles, if any.
    fn sigma_nodes(&self) -> Option<&[f64]> {
        None
    }
}

/// A precomputed sequence. Polynomial and extended sequences repeat their
/// pattern indefinitely; others end at their length.
#[derive(Debug, Clone)]
pub struct FixedPoles {
    seq: PoleSequence,
    periodic: bool,
}

impl FixedPoles {
    pub fn new(seq: PoleSequence) -> Self {
        FixedPoles {
            seq,
            periodic: false,
        }
    }

    pub fn polynomial() -> Self {
        FixedPoles {
            seq: poles_polynomial(1).expect("m = 1"),
            periodic: true,
        }
    }

    pub fn extended() -> Self {
        FixedPoles {
            seq: poles_extended(2).expect("m = 2"),
            periodic: true,
        }
    }

    pub fn sequence(&self) -> &PoleSequence {
        &self.seq
    }
}

impl PoleStrategy for FixedPoles {
    fn name(&self) -> &str {
        &self.seq.strategy_name
    }

    fn next_pole(&mut self, step: usize, _ritz: &[f64]) -> Result<Pole> {
        let len = self.seq.len();
        let idx = step
            .checked_sub(1)
            .ok_or(Error::InvalidSize("steps are 1-based"))?;
        if self.periodic {
            Ok(self.seq.poles[idx % len])
        } else {
            self.seq.poles.get(idx).copied().ok_or_else(|| {
                Error::InvalidParameter(format!(
                    "pole sequence '{}' has only {len} poles",
                    self.seq.strategy_name
                ))
            })
        }
    }

    fn sigma_nodes(&self) -> Option<&[f64]> {
        self.seq.sigma_nodes.as_deref()
    }
}

/// Adaptive poles. The candidate grid is rebuilt every step from the current
/// Ritz interval, so no spectral bounds are needed up front.
#[derive(Debug, Clone, Default)]
pub struct AdaptivePoles {
    chosen: Vec<Pole>,
    points: Option<usize>,
    pub degenerate_steps: usize,
}

impl AdaptivePoles {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with_grid_points(points: usize) -> Self {
        AdaptivePoles {
            points: Some(points),
            ..Self::default()
        }
    }

    pub fn chosen(&self) -> &[Pole] {
        &self.chosen
    }

    fn grid_for(&self, ritz: &[f64]) -> Result<CondenserGrid> {
        let lo = ritz.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = ritz.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        if !(lo > 0.0) {
            return Err(Error::NotPositiveDefinite {
                context: "Ritz values for adaptive poles",
                value: lo,
            });
        }
        CondenserGrid::new(
            lo,
            hi,
            self.points.unwrap_or(DEFAULT_GRID_POINTS),
            DEFAULT_RANGE_FACTOR,
        )
    }

    fn select(&mut self, ritz: &[f64], extra_excluded: Option<Pole>) -> Result<Pole> {
        let grid = self.grid_for(ritz)?;
        let mut excluded = self.chosen.clone();
        excluded.extend(extra_excluded);
        let choice = adaptive_next_pole(ritz, &excluded, &grid)?;
        if choice.degenerate {
            self.degenerate_steps += 1;
        }
        Ok(choice.pole)
    }
}

impl PoleStrategy for AdaptivePoles {
    fn name(&self) -> &str {
        "adaptive"
    }

    fn next_pole(&mut self, step: usize, ritz: &[f64]) -> Result<Pole> {
        let pole = if step <= 1 || ritz.is_empty() {
            Pole::Infinity
        } else {
            self.select(ritz, None)?
        };
        self.chosen.push(pole);
        Ok(pole)
    }

    fn resample(&mut self, _step: usize, rejected: Pole, ritz: &[f64]) -> Result<Pole> {
        self.chosen.pop();
        let pole = self.select(ritz, Some(rejected))?;
        self.chosen.push(pole);
        Ok(pole)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StrategyKind {
    Poly,
    Extended,
    Leja,
    Adaptive,
}

impl StrategyKind {
    pub fn name(&self) -> &'static str {
        match self {
            StrategyKind::Poly => "poly",
            StrategyKind::Extended => "extended",
            StrategyKind::Leja => "leja",
            StrategyKind::Adaptive => "adaptive",
        }
    }

    pub fn needs_bounds(&self) -> bool {
        matches!(self, StrategyKind::Leja)
    }

    /// `bounds` is required for Leja and ignored otherwise.
    pub fn build(
        &self,
        steps: usize,
        bounds: Option<&PencilSpectrumBounds>,
    ) -> Result<Box<dyn PoleStrategy>> {
        Ok(match self {
            StrategyKind::Poly => Box::new(FixedPoles::polynomial()),
            StrategyKind::Extended => Box::new(FixedPoles::extended()),
            StrategyKind::Adaptive => Box::new(AdaptivePoles::new()),
            StrategyKind::Leja => {
                let bounds = bounds.ok_or_else(|| {
                    Error::InvalidParameter("Leja poles need spectral bounds".into())
                })?;
                let grid = CondenserGrid::from_bounds(bounds)?;
                Box::new(FixedPoles::new(leja_sequence(bounds, steps.max(1), &grid)?))
            }
        })
    }
}

impl FromStr for StrategyKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "poly" => Ok(StrategyKind::Poly),
            "extended" => Ok(StrategyKind::Extended),
            "leja" => Ok(StrategyKind::Leja),
            "adaptive" => Ok(StrategyKind::Adaptive),
            other => Err(Error::InvalidParameter(format!(
                "unknown pole strategy '{other}' (expected poly, extended, leja or adaptive)"
            ))),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn bounds(a: f64, b: f64) -> PencilSpectrumBounds {
        PencilSpectrumBounds::new(a, b).unwrap()
    }

    #[test]
    fn fixed_patterns() {
        assert_eq!(poles_polynomial(1).unwrap().poles, vec![Pole::Infinity]);
        assert_eq!(poles_polynomial(3).unwrap().poles, vec![Pole::Infinity; 3]);
        use Pole::{Infinity as I, Zero as Z};
        assert_eq!(poles_extended(4).unwrap().poles, vec![I, Z, I, Z]);
        assert_eq!(poles_extended(1).unwrap().poles, vec![I]);
        assert!(poles_extended(0).is_err());
        let mut ext = FixedPoles::extended();
        let got: Vec<Pole> = (1..=5).map(|j| ext.next_pole(j, &[]).unwrap()).collect();
        assert_eq!(got, vec![I, Z, I, Z, I]);
    }

    #[test]
    fn finite_poles_must_be_negative() {
        assert!(Pole::finite(-1.0).is_ok());
        assert!(Pole::finite(0.0).is_err());
        assert!(Pole::finite(2.0).is_err());
        assert!(Pole::finite(f64::NEG_INFINITY).is_err());
    }

    #[test]
    fn grid_shape() {
        let g = CondenserGrid::new(1.0, 2.0, 1000, 1e8).unwrap();
        assert_eq!(g.sigma_candidates.len(), 1000);
        assert_eq!(g.sigma_candidates[0], 1.0);
        assert_eq!(*g.sigma_candidates.last().unwrap(), 2.0);
        assert!(g.sigma_candidates.windows(2).all(|w| w[0] <= w[1]));
        assert!(g.xi_candidates.windows(2).all(|w| w[0] < w[1]));
        assert!((g.xi_candidates[0] + 2e8).abs() < 1e-4);
        assert!((g.xi_candidates[999] + 1e-8).abs() < 1e-20);
        assert!(g.xi_candidates.iter().all(|&x| x < 0.0));
    }

    #[test]
    fn leja_first_points() {
        let b = bounds(1.0, 2.0);
        let g = CondenserGrid::from_bounds(&b).unwrap();
        let s = leja_sequence(&b, 2, &g).unwrap();
        let nodes = s.sigma_nodes.unwrap();
        assert_eq!(nodes[0], 1.0);
        assert_eq!(nodes[1], 2.0);
        assert_eq!(s.poles[0], Pole::Finite(*g.xi_candidates.last().unwrap()));
    }

    #[test]
    fn leja_is_deterministic_and_in_range() {
        let b = bounds(0.5, 40.0);
        let g = CondenserGrid::from_bounds(&b).unwrap();
        let s1 = leja_sequence(&b, 30, &g).unwrap();
        let s2 = leja_sequence(&b, 30, &g).unwrap();
        assert_eq!(s1, s2);
        assert_eq!(s1.len(), 30);
        for x in s1.sigma_nodes.as_ref().unwrap() {
            assert!(b.contains(*x));
        }
        let (lo, hi) = (g.xi_candidates[0], *g.xi_candidates.last().unwrap());
        for p in &s1.poles {
            match p {
                Pole::Finite(x) => assert!(*x >= lo && *x <= hi),
                other => panic!("unexpected pole {other}"),
            }
        }
    }

    #[test]
    fn leja_wide_range_stays_finite() {
        let b = bounds(1.0, 1e8);
        let g = CondenserGrid::from_bounds(&b).unwrap();
        let s = leja_sequence(&b, 50, &g).unwrap();
        assert!(s.poles.iter().all(|p| p.magnitude().is_finite()));
        assert!(s.sigma_nodes.unwrap().iter().all(|x| x.is_finite()));
    }

    #[test]
    fn incremental_tables_match_direct_products() {
        let b = bounds(1.0, 10.0);
        let g = CondenserGrid::new(1.0, 10.0, 200, 1e3).unwrap();
        let s = leja_sequence(&b, 10, &g).unwrap();
        let nodes = s.sigma_nodes.unwrap();
        let mut table = LogTable::new(&g.xi_candidates);
        for j in 0..10 {
            table.add_node(nodes[j]);
            table.add_pole(s.poles[j]);
            for (k, &z) in g.xi_candidates.iter().enumerate() {
                let mut prod = 1.0;
                for i in 0..=j {
                    let xi = match s.poles[i] {
                        Pole::Finite(x) => x,
                        _ => unreachable!(),
                    };
                    prod *= (z - nodes[i]) / (1.0 - z / xi);
                }
                let direct = prod.abs().ln();
                if direct.is_finite() {
                    assert!((table.value[k] - direct).abs() <= 1e-10 * direct.abs().max(1.0));
                }
            }
        }
    }

    #[test]
    fn adaptive_examples() {
        let g = CondenserGrid {
            sigma_candidates: vec![1.0],
            xi_candidates: vec![-2.0, -1.0],
        };
        let c = adaptive_next_pole(&[1.0], &[], &g).unwrap();
        assert_eq!(c.pole, Pole::Finite(-1.0));
        assert!(!c.degenerate);
        let c = adaptive_next_pole(&[], &[], &g).unwrap();
        assert_eq!(c.pole, Pole::Finite(-1.0));
        assert_eq!(first_adaptive_pole(&g), Pole::Infinity);
    }

    #[test]
    fn adaptive_skips_previous_poles() {
        let g = CondenserGrid {
            sigma_candidates: vec![1.0],
            xi_candidates: vec![-2.0, -1.0],
        };
        let c = adaptive_next_pole(&[1.0], &[Pole::Finite(-1.0)], &g).unwrap();
        assert_eq!(c.pole, Pole::Finite(-2.0));
        let both = [Pole::Finite(-1.0), Pole::Finite(-2.0)];
        let c = adaptive_next_pole(&[1.0], &both, &g).unwrap();
        assert!(c.degenerate);
    }

    #[test]
    fn adaptive_strategy_starts_at_infinity() {
        let mut s = AdaptivePoles::new();
        assert_eq!(s.next_pole(1, &[]).unwrap(), Pole::Infinity);
        let p = s.next_pole(2, &[1.5]).unwrap();
        assert!(matches!(p, Pole::Finite(x) if x < 0.0));
        assert_eq!(s.chosen().len(), 2);
    }

    #[test]
    fn strategy_names_parse() {
        for k in [
            StrategyKind::Poly,
            StrategyKind::Extended,
            StrategyKind::Leja,
            StrategyKind::Adaptive,
        ] {
            assert_eq!(k.name().parse::<StrategyKind>().unwrap(), k);
        }
        assert!("zolotarev".parse::<StrategyKind>().is_err());
        assert!(StrategyKind::Leja.build(5, None).is_err());
    }
}
