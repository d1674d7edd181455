//! Achievable throughput regions and their Pareto frontiers.
//!
//! The region of a scheme is every `(R_c, R_cbar)` pair achieved by some grid
//! point together with all pairs it dominates, so it is described by its
//! non-dominated points.

use gfra_core::{Allocation, ScenarioConfig};
use rayon::prelude::*;

use crate::backend::{evaluate, Backend, PointResult};
use crate::error::{CliError, Result};
use crate::output::{format_float, Table};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Scheme {
    NonOrthogonal,
    Tdma,
}

impl Scheme {
    pub fn label(self) -> &'static str {
        match self {
            Scheme::NonOrthogonal => "non-orthogonal",
            Scheme::Tdma => "tdma",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RegionSpec {
    pub base: ScenarioConfig,
    /// Fractions of CS load.
    pub gamma_c: Vec<f64>,
    /// TDMA fractions; empty skips the TDMA scheme.
    pub alpha: Vec<f64>,
    pub backend: Backend,
}

impl RegionSpec {
    pub fn new(base: ScenarioConfig, gamma_c: Vec<f64>, alpha: Vec<f64>, backend: Backend) -> Result<Self> {
        if gamma_c.is_empty() {
            return Err(CliError::config("region gamma_c grid is empty"));
        }
        for (name, grid) in [("gamma_c", &gamma_c), ("alpha", &alpha)] {
            if let Some(x) = grid.iter().find(|x| !(0.0..=1.0).contains(*x)) {
                return Err(CliError::config(format!("region {name} value {x} is outside [0, 1]")));
            }
        }
        let spec = RegionSpec {
            base,
            gamma_c,
            alpha,
            backend,
        };
        for (_, _, cfg) in spec.points() {
            cfg.validate().map_err(|e| CliError::config(e.to_string()))?;
            backend.check_compatible(&cfg)?;
        }
        Ok(spec)
    }

    /// Every grid point with its scheme and TDMA fraction.
    fn points(&self) -> Vec<(Scheme, Option<f64>, ScenarioConfig)> {
        let mut out = Vec::new();
        for &g in &self.gamma_c {
            let cfg = ScenarioConfig {
                gamma_c: g,
                allocation: Allocation::NonOrthogonal,
                ..self.base.clone()
            };
            out.push((Scheme::NonOrthogonal, None, cfg));
        }
        for &a in &self.alpha {
            for &g in &self.gamma_c {
                let cfg = ScenarioConfig {
                    gamma_c: g,
                    allocation: Allocation::Tdma { alpha: a },
                    ..self.base.clone()
                };
                out.push((Scheme::Tdma, Some(a), cfg));
            }
        }
        out
    }
}

/// One evaluated grid point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RegionPoint {
    pub scheme: Scheme,
    pub gamma_c: f64,
    pub alpha: Option<f64>,
    pub result: PointResult,
}

impl RegionPoint {
    pub fn pair(&self) -> (f64, f64) {
        (self.result.metrics.r_c, self.result.metrics.r_cbar)
    }
}

/// `0, 0.05, ..., 1`, used when a region section gives no `gamma_c` grid.
pub fn default_gamma_grid() -> Vec<f64> {
    (0..=20).map(|i| f64::from(i) / 20.0).collect()
}

/// `true` when `a` is at least as good as `b` in both coordinates.
pub fn dominates(a: (f64, f64), b: (f64, f64)) -> bool {
    a.0 >= b.0 && a.1 >= b.1
}

/// Indices of the non-dominated pairs, ordered by increasing first
/// coordinate. Of several identical pairs only the first is kept.
pub fn pareto_indices(pairs: &[(f64, f64)]) -> Vec<usize> {
    let mut keep: Vec<usize> = (0..pairs.len())
        .filter(|&i| {
            !pairs
                .iter()
                .enumerate()
                .any(|(j, &p)| j != i && dominates(p, pairs[i]) && (p != pairs[i] || j < i))
        })
        .collect();
    keep.sort_by(|&a, &b| pairs[a].0.total_cmp(&pairs[b].0).then(a.cmp(&b)));
    keep
}

/// `true` when every pair of `inner` is dominated by some pair of `outer`,
/// allowing a slack of `tol` in each coordinate.
pub fn region_contains(outer: &[(f64, f64)], inner: &[(f64, f64)], tol: f64) -> bool {
    inner
        .iter()
        .all(|&p| outer.iter().any(|&q| q.0 + tol >= p.0 && q.1 + tol >= p.1))
}

/// Evaluates the whole grid in parallel.
pub fn evaluate_region(spec: &RegionSpec) -> Result<Vec<RegionPoint>> {
    spec.points()
        .into_par_iter()
        .map(|(scheme, alpha, cfg)| {
            Ok(RegionPoint {
                scheme,
                gamma_c: cfg.gamma_c,
                alpha,
                result: evaluate(&cfg, &spec.backend)?,
            })
        })
        .collect()
}

/// Non-dominated points of one scheme.
pub fn frontier(points: &[RegionPoint], scheme: Scheme) -> Vec<RegionPoint> {
    let own: Vec<RegionPoint> = points.iter().filter(|p| p.scheme == scheme).copied().collect();
    let pairs: Vec<(f64, f64)> = own.iter().map(RegionPoint::pair).collect();
    pareto_indices(&pairs).into_iter().map(|i| own[i]).collect()
}

/// Frontier points of both schemes, labelled by scheme.
pub fn compute_region(spec: &RegionSpec) -> Result<Vec<RegionPoint>> {
    let points = evaluate_region(spec)?;
    let mut out = frontier(&points, Scheme::NonOrthogonal);
    out.extend(frontier(&points, Scheme::Tdma));
    Ok(out)
}

/// Columns: scheme, gamma_c, alpha (empty for non-orthogonal), R_c, R_cbar,
/// then standard errors and seed for stochastic backends.
pub fn region_table(spec: &RegionSpec, frontier: &[RegionPoint]) -> Table {
    let stochastic = spec.backend.is_stochastic();
    let mut header = vec!["scheme", "gamma_c", "alpha", "R_c", "R_cbar"];
    if stochastic {
        header.extend(["se_R_c", "se_R_cbar", "seed"]);
    }
    let mut table = Table::new(header);
    for p in frontier {
        let m = p.result.metrics;
        let mut row = vec![
            p.scheme.label().to_string(),
            format_float(p.gamma_c),
            p.alpha.map_or_else(String::new, format_float),
            format_float(m.r_c),
            format_float(m.r_cbar),
        ];
        if stochastic {
            let se = p.result.std_error.unwrap_or_default();
            row.push(format_float(se.r_c));
            row.push(format_float(se.r_cbar));
            row.push(p.result.seed.map_or_else(String::new, |s| s.to_string()));
        }
        table.push(row);
    }
    table
}
