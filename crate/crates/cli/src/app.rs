//! Command-line surface: argument definitions and command dispatch.

use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use gfra_core::{evaluate_erasure, METRIC_NAMES};

use crate::backend::{evaluate, Backend, PointResult};
use crate::config::{BackendKind, ConfigFile, RunSettings};
use crate::error::{CliError, Result};
use crate::output::{emit, format_float, Table};
use crate::region::{compute_region, default_gamma_grid, region_table, RegionSpec};
use crate::sweep::{run_sweep, sweep_table, SweepSpec};
use crate::validate::{validate, Grid, Options, DEFAULT_MAX_FRAMES};

#[derive(Parser, Debug)]
#[command(
    name = "gfra",
    version,
    about = "Throughput and packet success rate of two-hop grant-free random access with critical and non-critical services"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Evaluate one scenario.
    Eval(RunArgs),
    /// Simulate an erasure-channel scenario frame by frame.
    Sim(RunArgs),
    /// Simulate a Rayleigh-fading scenario.
    Fading(RunArgs),
    /// Sweep one parameter as described by the [sweep] section.
    Sweep(RunArgs),
    /// Throughput-region frontiers of non-orthogonal sharing and TDMA.
    Region(RunArgs),
    /// Compare the analytic formulas with the simulator over a grid.
    Validate(RunArgs),
}

#[derive(Args, Debug, Clone, Default)]
pub struct RunArgs {
    /// Scenario file (TOML).
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Output CSV; stdout when omitted.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Master seed; defaults to 0xC0FFEE.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Simulated frames (frame budget per grid point for `validate`).
    #[arg(long)]
    pub frames: Option<u64>,
    /// Simulated slots for the fading backend.
    #[arg(long)]
    pub slots: Option<u64>,
    #[arg(long, value_enum)]
    pub backend: Option<BackendKind>,
}

impl RunArgs {
    fn file(&self) -> Result<ConfigFile> {
        let path = self
            .config
            .as_deref()
            .ok_or_else(|| CliError::config("--config is required"))?;
        ConfigFile::load(path)
    }

    fn settings(&self, file: &ConfigFile) -> Result<RunSettings> {
        let mut s = file.run_settings()?;
        if let Some(seed) = self.seed {
            s = s.with_seed(seed);
        }
        if let Some(f) = self.frames {
            s.frames = f;
        }
        if let Some(n) = self.slots {
            s.fading_slots = n;
        }
        if s.frames == 0 || s.fading_slots == 0 {
            return Err(CliError::config("--frames and --slots must be positive"));
        }
        if self.backend.is_some() {
            s.backend = self.backend;
        }
        Ok(s)
    }

    fn out(&self) -> Option<&Path> {
        self.out.as_deref()
    }
}

/// One-row table of a single evaluation.
pub fn point_table(backend: &Backend, r: &PointResult) -> Table {
    let mut header: Vec<String> = METRIC_NAMES.iter().map(|s| s.to_string()).collect();
    let mut row: Vec<String> = r.metrics.as_array().iter().map(|&x| format_float(x)).collect();
    if backend.is_stochastic() {
        header.extend(METRIC_NAMES.iter().map(|s| format!("se_{s}")));
        header.push("seed".into());
        row.extend(
            r.std_error
                .unwrap_or_default()
                .as_array()
                .iter()
                .map(|&x| format_float(x)),
        );
        row.push(r.seed.map_or_else(String::new, |s| s.to_string()));
    }
    let mut t = Table::new(header);
    t.push(row);
    t
}

fn single(args: &RunArgs, forced: Option<BackendKind>) -> Result<()> {
    let file = args.file()?;
    let cfg = file.scenario()?;
    let settings = args.settings(&file)?;
    let backend = Backend::resolve(forced.or(settings.backend), &cfg, &settings);
    let result = evaluate(&cfg, &backend)?;
    emit(args.out(), &point_table(&backend, &result).to_csv()?)
}

fn sweep(args: &RunArgs) -> Result<()> {
    let file = args.file()?;
    let cfg = file.scenario()?;
    let settings = args.settings(&file)?;
    let section = file
        .sweep
        .as_ref()
        .ok_or_else(|| CliError::config("missing [sweep] section"))?;
    let backend = Backend::resolve(settings.backend, &cfg, &settings);
    let spec = SweepSpec::new(cfg, &section.parameter, &section.values, backend)?;
    let results = run_sweep(&spec)?;
    emit(args.out(), &sweep_table(&spec, &results).to_csv()?)
}

fn region(args: &RunArgs) -> Result<()> {
    let file = args.file()?;
    let cfg = file.scenario()?;
    let settings = args.settings(&file)?;
    let section = file
        .region
        .clone()
        .ok_or_else(|| CliError::config("missing [region] section"))?;
    let backend = Backend::resolve(settings.backend, &cfg, &settings);
    let spec = RegionSpec::new(
        cfg,
        section.gamma_c.unwrap_or_else(default_gamma_grid),
        section.alpha,
        backend,
    )?;
    let frontier = compute_region(&spec)?;
    emit(args.out(), &region_table(&spec, &frontier).to_csv()?)
}

fn run_validate(args: &RunArgs) -> Result<()> {
    let file = args.config.as_ref().map(|_| args.file()).transpose()?;
    let section = file.as_ref().and_then(|f| f.validate.clone()).unwrap_or_default();
    let grid = Grid::from_section(&section)?;
    let file_seed = file.as_ref().map(|f| f.run_settings()).transpose()?.map(|s| s.seed);
    let seed = args.seed.or(file_seed).unwrap_or(gfra_core::rng::DEFAULT_SEED);
    let mut opts = Options::new(args.frames.unwrap_or(DEFAULT_MAX_FRAMES), seed)?;
    if let Some(t) = section.target_std_error {
        opts.target_std_error = t;
    }
    let report = validate(&grid, &opts, &|cfg| evaluate_erasure(cfg))?;
    emit(args.out(), &report.table().to_csv()?)?;
    eprintln!("{}", report.summary());
    for c in report.flagged().take(20) {
        eprintln!(
            "  flagged: L={} T={} G={} gamma_c={} K={} {} analytic={} z={}",
            c.config.aps,
            c.config.slots,
            c.config.load,
            c.config.gamma_c,
            c.config.tolerance,
            METRIC_NAMES[c.metric],
            c.analytic.map_or_else(|| "-".into(), format_float),
            c.z.map_or_else(|| c.error.clone().unwrap_or_default(), |z| format!("{z:.2}")),
        );
    }
    if report.passed() {
        Ok(())
    } else {
        Err(CliError::Validation(report.summary()))
    }
}

pub fn run(cli: &Cli) -> Result<()> {
    match &cli.command {
        Command::Eval(a) => single(a, None),
        Command::Sim(a) => single(a, Some(BackendKind::Sim)),
        Command::Fading(a) => single(a, Some(BackendKind::Fading)),
        Command::Sweep(a) => sweep(a),
        Command::Region(a) => region(a),
        Command::Validate(a) => run_validate(a),
    }
}
