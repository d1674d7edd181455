//! Analytic formulas checked against the frame simulator over a grid of
//! erasure-channel scenarios.
//!
//! Each grid point is simulated until every metric has a standard error at
//! most the target (or the frame budget runs out), then each metric becomes
//! one cell with its z-score.

use gfra_core::sim::run_erasure;
use gfra_core::{ScenarioConfig, ServiceMetrics, SimEstimate, Tolerance, METRIC_NAMES};
use rayon::prelude::*;

use crate::config::ValidateSection;
use crate::error::{CliError, Result};
use crate::output::{format_float, Table};

/// Cells within this many standard errors count as agreeing.
pub const Z_PASS: f64 = 3.0;
/// A single cell beyond this fails the run.
pub const Z_HARD: f64 = 5.0;
/// Fraction of cells that must agree.
pub const PASS_FRACTION: f64 = 0.99;
pub const DEFAULT_TARGET_STD_ERROR: f64 = 0.002;
pub const DEFAULT_MAX_FRAMES: u64 = 2_000_000;
const PILOT_FRAMES: u64 = 4096;

/// Axes of the validation grid; every combination is one scenario with
/// collision receiver and non-orthogonal sharing.
#[derive(Debug, Clone, PartialEq)]
pub struct Grid {
    pub aps: Vec<u32>,
    pub eps1: Vec<f64>,
    pub eps2: Vec<f64>,
    /// Total load per slot `G / T`.
    pub load_per_slot: Vec<f64>,
    pub gamma_c: Vec<f64>,
    pub tolerance: Vec<Tolerance>,
    pub slots: u32,
}

impl Default for Grid {
    fn default() -> Self {
        Grid {
            aps: vec![1, 2, 3, 5],
            eps1: vec![0.1, 0.5, 0.9],
            eps2: vec![0.1, 0.5, 0.9],
            load_per_slot: vec![0.25, 1.0, 2.0, 4.0],
            gamma_c: vec![0.1, 0.5, 0.9],
            tolerance: vec![
                Tolerance::Finite(0),
                Tolerance::Finite(1),
                Tolerance::Finite(2),
                Tolerance::Finite(5),
                Tolerance::Infinite,
            ],
            slots: 8,
        }
    }
}

impl Grid {
    pub fn from_section(s: &ValidateSection) -> Result<Self> {
        let d = Grid::default();
        let tolerance = match &s.tolerance {
            Some(ts) => ts.iter().map(|t| t.resolve()).collect::<Result<Vec<_>>>()?,
            None => d.tolerance,
        };
        let grid = Grid {
            aps: s.aps.clone().unwrap_or(d.aps),
            eps1: s.eps1.clone().unwrap_or(d.eps1),
            eps2: s.eps2.clone().unwrap_or(d.eps2),
            load_per_slot: s.load_per_slot.clone().unwrap_or(d.load_per_slot),
            gamma_c: s.gamma_c.clone().unwrap_or(d.gamma_c),
            tolerance,
            slots: s.slots.unwrap_or(d.slots),
        };
        grid.configs()?;
        Ok(grid)
    }

    /// All scenarios of the grid, validated.
    pub fn configs(&self) -> Result<Vec<ScenarioConfig>> {
        let mut out = Vec::new();
        for &l in &self.aps {
            for &e1 in &self.eps1 {
                for &e2 in &self.eps2 {
                    for &g in &self.load_per_slot {
                        for &gc in &self.gamma_c {
                            for &k in &self.tolerance {
                                let load = g * f64::from(self.slots);
                                let cfg = ScenarioConfig::erasure(l, self.slots, load, gc, e1, e2).with_tolerance(k);
                                cfg.validate()
                                    .map_err(|e| CliError::config(format!("validation grid: {e}")))?;
                                out.push(cfg);
                            }
                        }
                    }
                }
            }
        }
        if out.is_empty() {
            return Err(CliError::config("validation grid is empty"));
        }
        Ok(out)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Options {
    /// Frame budget per grid point.
    pub max_frames: u64,
    pub target_std_error: f64,
    pub seed: u64,
}

impl Options {
    pub fn new(max_frames: u64, seed: u64) -> Result<Self> {
        if max_frames == 0 {
            return Err(CliError::config("simulation budget must be at least one frame"));
        }
        Ok(Options {
            max_frames,
            target_std_error: DEFAULT_TARGET_STD_ERROR,
            seed,
        })
    }
}

/// One metric of one grid point.
#[derive(Debug, Clone, PartialEq)]
pub struct Cell {
    pub config: ScenarioConfig,
    /// Index into [`METRIC_NAMES`].
    pub metric: usize,
    pub analytic: Option<f64>,
    pub simulated: Option<SimEstimate>,
    pub z: Option<f64>,
    pub frames: u64,
    pub error: Option<String>,
}

impl Cell {
    /// Agreement within [`Z_PASS`]; failed cells never agree.
    pub fn agrees(&self) -> bool {
        self.z.is_some_and(|z| z.abs() <= Z_PASS)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Report {
    pub cells: Vec<Cell>,
    pub seed: u64,
}

impl Report {
    pub fn agreeing_fraction(&self) -> f64 {
        let ok = self.cells.iter().filter(|c| c.agrees()).count();
        ok as f64 / self.cells.len().max(1) as f64
    }

    pub fn max_abs_z(&self) -> f64 {
        self.cells.iter().filter_map(|c| c.z).map(f64::abs).fold(0.0, f64::max)
    }

    pub fn errors(&self) -> usize {
        self.cells.iter().filter(|c| c.error.is_some()).count()
    }

    pub fn flagged(&self) -> impl Iterator<Item = &Cell> {
        self.cells.iter().filter(|c| !c.agrees())
    }

    pub fn passed(&self) -> bool {
        !self.cells.is_empty() && self.agreeing_fraction() >= PASS_FRACTION && self.max_abs_z() <= Z_HARD
    }

    pub fn summary(&self) -> String {
        format!(
            "{}: {} cells, {:.2}% within |z| <= {Z_PASS}, max |z| = {:.2}, {} errors, seed {}",
            if self.passed() { "PASS" } else { "FAIL" },
            self.cells.len(),
            100.0 * self.agreeing_fraction(),
            self.max_abs_z(),
            self.errors(),
            self.seed
        )
    }

    pub fn table(&self) -> Table {
        let mut t = Table::new([
            "L",
            "eps1",
            "eps2",
            "T",
            "G",
            "gamma_c",
            "K",
            "metric",
            "analytic",
            "simulated",
            "std_error",
            "z",
            "frames",
            "seed",
            "status",
        ]);
        for c in &self.cells {
            let e = c.config.erasure_params().expect("validation grid is erasure-only");
            let opt = |x: Option<f64>| x.map_or_else(String::new, format_float);
            let status = match (&c.error, c.agrees()) {
                (Some(msg), _) => format!("error: {msg}"),
                (None, true) => "ok".into(),
                (None, false) => "flagged".into(),
            };
            t.push(vec![
                c.config.aps.to_string(),
                format_float(e.eps1),
                format_float(e.eps2),
                c.config.slots.to_string(),
                format_float(c.config.load),
                format_float(c.config.gamma_c),
                c.config.tolerance.to_string(),
                METRIC_NAMES[c.metric].to_string(),
                opt(c.analytic),
                opt(c.simulated.map(|s| s.mean)),
                opt(c.simulated.map(|s| s.std_error)),
                opt(c.z),
                c.frames.to_string(),
                c.simulated.map_or_else(String::new, |s| s.seed.to_string()),
                status,
            ]);
        }
        t
    }
}

/// Standard error to divide by. When the sample shows no spread it falls
/// back to the spread implied by the analytic value, so a rare event that
/// never occurred is not scored as infinitely far off.
fn effective_std_error(est: &SimEstimate, analytic: f64, metric: usize, slots: u32) -> f64 {
    if est.std_error > 0.0 {
        return est.std_error;
    }
    let p = analytic.clamp(0.0, 1.0);
    // throughputs average `T` slots per frame
    let trials = if metric < 2 {
        est.n_samples * u64::from(slots)
    } else {
        est.n_samples
    };
    (p * (1.0 - p) / trials.max(1) as f64).sqrt()
}

fn z_score(est: &SimEstimate, analytic: f64, metric: usize, slots: u32) -> f64 {
    let d = est.mean - analytic;
    let se = effective_std_error(est, analytic, metric, slots);
    if se > 0.0 {
        d / se
    } else if d.abs() <= 1e-12 {
        0.0
    } else {
        d.signum() * f64::INFINITY
    }
}

/// Frames needed so that the largest standard error drops to `target`.
fn frames_needed(pilot: &[SimEstimate; 4], pilot_frames: u64, target: f64) -> u64 {
    let worst = pilot.iter().map(|e| e.std_error).fold(0.0, f64::max);
    if worst <= target {
        return pilot_frames;
    }
    // standard errors shrink as 1/sqrt(frames); the margin absorbs pilot noise
    let ratio = (worst / target).powi(2) * 1.2;
    (pilot_frames as f64 * ratio).ceil() as u64
}

fn validate_point(cfg: &ScenarioConfig, index: usize, opts: &Options, analytic: &Analytic) -> Vec<Cell> {
    let seed = opts.seed.wrapping_add(index as u64);
    let failed = |msg: String| -> Vec<Cell> {
        (0..4)
            .map(|metric| Cell {
                config: cfg.clone(),
                metric,
                analytic: None,
                simulated: None,
                z: None,
                frames: 0,
                error: Some(msg.clone()),
            })
            .collect()
    };
    let reference = match analytic(cfg) {
        Ok(m) => m,
        Err(e) => return failed(format!("analytic: {e}")),
    };
    let run = |frames| run_erasure(cfg, frames, seed).map(|s| s.metrics(cfg.receiver).as_array());
    let pilot_frames = PILOT_FRAMES.min(opts.max_frames);
    let mut frames = pilot_frames;
    let mut sim = match run(pilot_frames) {
        Ok(s) => s,
        Err(e) => return failed(format!("simulation: {e}")),
    };
    let needed = frames_needed(&sim, pilot_frames, opts.target_std_error).min(opts.max_frames);
    if needed > pilot_frames {
        frames = needed;
        sim = match run(needed) {
            Ok(s) => s,
            Err(e) => return failed(format!("simulation: {e}")),
        };
    }
    let reference = reference.as_array();
    (0..4)
        .map(|metric| {
            let est = sim[metric];
            let (z, error) = if est.n_samples == 0 {
                (None, Some("no samples".to_string()))
            } else {
                (Some(z_score(&est, reference[metric], metric, cfg.slots)), None)
            };
            Cell {
                config: cfg.clone(),
                metric,
                analytic: Some(reference[metric]),
                simulated: Some(est),
                z,
                frames,
                error,
            }
        })
        .collect()
}

/// Analytic evaluator under test.
pub type Analytic = dyn Fn(&ScenarioConfig) -> gfra_core::Result<ServiceMetrics> + Sync;

/// Runs the whole grid; per-point failures are recorded in the cells.
pub fn validate(grid: &Grid, opts: &Options, analytic: &Analytic) -> Result<Report> {
    if opts.max_frames == 0 {
        return Err(CliError::config("simulation budget must be at least one frame"));
    }
    if !(opts.target_std_error.is_finite() && opts.target_std_error > 0.0) {
        return Err(CliError::config("target standard error must be positive"));
    }
    let configs = grid.configs()?;
    let cells: Vec<Cell> = configs
        .par_iter()
        .enumerate()
        .flat_map_iter(|(i, cfg)| validate_point(cfg, i, opts, analytic))
        .collect();
    Ok(Report { cells, seed: opts.seed })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_grid_size() {
        assert_eq!(Grid::default().configs().unwrap().len(), 4 * 9 * 4 * 3 * 5);
    }

    #[test]
    fn zero_budget_rejected() {
        assert!(Options::new(0, 1).is_err());
    }

    #[test]
    fn null_spread_fallback() {
        let est = SimEstimate {
            mean: 0.0,
            std_error: 0.0,
            n_samples: 10_000,
            seed: 0,
        };
        // one expected success in 10^4 trials: not a gross disagreement
        assert!(z_score(&est, 1e-4, 2, 8).abs() < 1.1);
        assert_eq!(z_score(&est, 0.0, 2, 8), 0.0);
    }

    #[test]
    fn frames_scale_quadratically() {
        let e = |se| SimEstimate {
            mean: 0.5,
            std_error: se,
            n_samples: 1000,
            seed: 0,
        };
        assert_eq!(frames_needed(&[e(0.001); 4], 1000, 0.002), 1000);
        assert_eq!(frames_needed(&[e(0.004), e(0.0), e(0.0), e(0.0)], 1000, 0.002), 4800);
    }
}
