//! Scenario files.
//!
//! A scenario file is TOML with a mandatory top-level `schema_version` and
//! typed sections:
//!
//! ```toml
//! schema_version = 1
//!
//! [scenario]
//! aps = 3                         # L
//! slots = 4                       # T
//! load = 8.0                      # G, packets per frame
//! gamma_c = 0.5
//! tolerance = "inf"               # or a non-negative integer K
//! receiver = "collision"          # or "superposition"
//! allocation = "non-orthogonal"   # or "tdma", which needs `alpha`
//!
//! [erasure]                       # exactly one of [erasure] and [fading]
//! eps1 = 0.5
//! eps2 = 0.5
//!
//! [run]                           # all optional
//! backend = "analytic"            # analytic, sim, fading, superposition
//! seed = 12648430
//! frames = 100000
//! samples = 100000                # fading slots
//! estimator = "exact"             # or "mc"
//! enumeration_limit = 200000
//! mc_samples = 2000
//!
//! [sweep]
//! parameter = "T"
//! values = [1, 2, 4, 8]
//!
//! [region]
//! gamma_c = [0.0, 0.5, 1.0]
//! alpha = [0.25, 0.5, 0.75]
//! ```
//!
//! `[fading]` takes `alpha2`, `beta2`, `p_c`, `p_cbar`, `p_c_ap`,
//! `p_cbar_ap`, `r_c` and `r_cbar`, each defaulting to the library default.
//! `[validate]` overrides the axes of the validation grid; see
//! [`crate::validate::Grid`].

use std::path::Path;

use clap::ValueEnum;
use gfra_core::rng::DEFAULT_SEED;
use gfra_core::superposition::{Estimator, DEFAULT_ENUMERATION_LIMIT};
use gfra_core::{Allocation, Channel, ErasureParams, FadingParams, Receiver, ScenarioConfig, Tolerance};
use serde::Deserialize;

use crate::error::{CliError, Result};

pub const SCHEMA_VERSION: u32 = 1;
pub const DEFAULT_FRAMES: u64 = 100_000;
pub const DEFAULT_FADING_SLOTS: u64 = 100_000;
pub const DEFAULT_MC_SAMPLES: u64 = 2_000;

#[derive(Debug, Clone, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct ConfigFile {
    pub schema_version: u32,
    pub scenario: Option<ScenarioSection>,
    pub erasure: Option<ErasureSection>,
    pub fading: Option<FadingSection>,
    #[serde(default)]
    pub run: RunSection,
    pub sweep: Option<SweepSection>,
    pub region: Option<RegionSection>,
    pub validate: Option<ValidateSection>,
}

/// `K` as written in a file: an integer or `"inf"`.
#[derive(Debug, Clone, Deserialize, PartialEq)]
#[serde(untagged)]
pub enum ToleranceValue {
    Finite(u32),
    Named(String),
}

impl ToleranceValue {
    pub fn resolve(&self) -> Result<Tolerance> {
        match self {
            ToleranceValue::Finite(k) => Ok(Tolerance::Finite(*k)),
            ToleranceValue::Named(s) => parse_tolerance(s),
        }
    }
}

pub fn parse_tolerance(s: &str) -> Result<Tolerance> {
    match s.trim().to_ascii_lowercase().as_str() {
        "inf" | "infinite" | "infinity" => Ok(Tolerance::Infinite),
        other => other.parse().map(Tolerance::Finite).map_err(|_| {
            CliError::config(format!(
                "tolerance must be a non-negative integer or \"inf\", got {s:?}"
            ))
        }),
    }
}

#[derive(Debug, Clone, Copy, Deserialize, PartialEq, Eq, Default)]
#[serde(rename_all = "kebab-case")]
pub enum ReceiverName {
    #[default]
    Collision,
    Superposition,
}

#[derive(Debug, Clone, Copy, Deserialize, PartialEq, Eq, Default)]
#[serde(rename_all = "kebab-case")]
pub enum AllocationName {
    #[default]
    NonOrthogonal,
    Tdma,
}

#[derive(Debug, Clone, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct ScenarioSection {
    pub aps: u32,
    pub slots: u32,
    pub load: f64,
    pub gamma_c: f64,
    pub tolerance: Option<ToleranceValue>,
    #[serde(default)]
    pub receiver: ReceiverName,
    #[serde(default)]
    pub allocation: AllocationName,
    pub alpha: Option<f64>,
}

#[derive(Debug, Clone, Copy, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct ErasureSection {
    pub eps1: f64,
    pub eps2: f64,
}

#[derive(Debug, Clone, Copy, Deserialize, PartialEq, Default)]
#[serde(deny_unknown_fields)]
pub struct FadingSection {
    pub alpha2: Option<f64>,
    pub beta2: Option<f64>,
    pub p_c: Option<f64>,
    pub p_cbar: Option<f64>,
    pub p_c_ap: Option<f64>,
    pub p_cbar_ap: Option<f64>,
    pub r_c: Option<f64>,
    pub r_cbar: Option<f64>,
}

impl FadingSection {
    pub fn params(&self) -> FadingParams {
        let d = FadingParams::default();
        FadingParams {
            alpha2: self.alpha2.unwrap_or(d.alpha2),
            beta2: self.beta2.unwrap_or(d.beta2),
            p_c: self.p_c.unwrap_or(d.p_c),
            p_cbar: self.p_cbar.unwrap_or(d.p_cbar),
            p_c_ap: self.p_c_ap.unwrap_or(d.p_c_ap),
            p_cbar_ap: self.p_cbar_ap.unwrap_or(d.p_cbar_ap),
            r_c: self.r_c.unwrap_or(d.r_c),
            r_cbar: self.r_cbar.unwrap_or(d.r_cbar),
        }
    }
}

/// Evaluation backend names.
#[derive(Debug, Clone, Copy, Deserialize, PartialEq, Eq, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum BackendKind {
    /// Closed forms (collision) or exact enumeration (superposition).
    Analytic,
    /// Frame-level erasure simulator.
    Sim,
    /// Rayleigh-fading Monte Carlo.
    Fading,
    /// Superposition evaluator with the configured estimator.
    Superposition,
}

#[derive(Debug, Clone, Copy, Deserialize, PartialEq, Eq)]
#[serde(rename_all = "kebab-case")]
pub enum EstimatorName {
    Exact,
    Mc,
}

#[derive(Debug, Clone, Deserialize, PartialEq, Default)]
#[serde(deny_unknown_fields)]
pub struct RunSection {
    pub backend: Option<BackendKind>,
    pub seed: Option<u64>,
    pub frames: Option<u64>,
    pub samples: Option<u64>,
    pub estimator: Option<EstimatorName>,
    pub enumeration_limit: Option<u64>,
    pub mc_samples: Option<u64>,
}

/// A swept value as written: numbers, or `"inf"` for `K`.
#[derive(Debug, Clone, Deserialize, PartialEq)]
#[serde(untagged)]
pub enum SweepValue {
    Int(i64),
    Float(f64),
    Named(String),
}

#[derive(Debug, Clone, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct SweepSection {
    pub parameter: String,
    pub values: Vec<SweepValue>,
}

#[derive(Debug, Clone, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct RegionSection {
    /// Defaults to `0, 0.05, ..., 1`.
    pub gamma_c: Option<Vec<f64>>,
    #[serde(default)]
    pub alpha: Vec<f64>,
}

#[derive(Debug, Clone, Deserialize, PartialEq, Default)]
#[serde(deny_unknown_fields)]
pub struct ValidateSection {
    pub aps: Option<Vec<u32>>,
    pub eps1: Option<Vec<f64>>,
    pub eps2: Option<Vec<f64>>,
    pub load_per_slot: Option<Vec<f64>>,
    pub gamma_c: Option<Vec<f64>>,
    pub tolerance: Option<Vec<ToleranceValue>>,
    pub slots: Option<u32>,
    pub target_std_error: Option<f64>,
}

/// Run settings after merging the file with command-line overrides.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RunSettings {
    pub backend: Option<BackendKind>,
    pub seed: u64,
    pub frames: u64,
    pub fading_slots: u64,
    pub estimator: Estimator,
}

impl ConfigFile {
    pub fn parse(text: &str) -> Result<Self> {
        let cfg: ConfigFile = toml::from_str(text).map_err(|e| CliError::config(e.to_string()))?;
        if cfg.schema_version != SCHEMA_VERSION {
            return Err(CliError::config(format!(
                "unsupported schema_version {}, expected {SCHEMA_VERSION}",
                cfg.schema_version
            )));
        }
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::config(format!("cannot read {}: {e}", path.display())))?;
        Self::parse(&text)
    }

    /// The scenario described by `[scenario]` and the channel section.
    pub fn scenario(&self) -> Result<ScenarioConfig> {
        let s = self
            .scenario
            .as_ref()
            .ok_or_else(|| CliError::config("missing [scenario] section"))?;
        let channel = match (&self.erasure, &self.fading) {
            (Some(e), None) => Channel::Erasure(ErasureParams {
                eps1: e.eps1,
                eps2: e.eps2,
            }),
            (None, Some(f)) => Channel::Fading(f.params()),
            (None, None) => return Err(CliError::config("one of [erasure] or [fading] is required")),
            (Some(_), Some(_)) => return Err(CliError::config("[erasure] and [fading] are mutually exclusive")),
        };
        let allocation = match (s.allocation, s.alpha) {
            (AllocationName::NonOrthogonal, None) => Allocation::NonOrthogonal,
            (AllocationName::NonOrthogonal, Some(_)) => {
                return Err(CliError::config("alpha is only meaningful with allocation = \"tdma\""))
            }
            (AllocationName::Tdma, Some(alpha)) => Allocation::Tdma { alpha },
            (AllocationName::Tdma, None) => return Err(CliError::config("allocation = \"tdma\" needs alpha")),
        };
        let tolerance = match &s.tolerance {
            Some(t) => t.resolve()?,
            None => Tolerance::Infinite,
        };
        let receiver = match s.receiver {
            ReceiverName::Collision => Receiver::Collision,
            ReceiverName::Superposition => Receiver::Superposition,
        };
        let cfg = ScenarioConfig {
            aps: s.aps,
            slots: s.slots,
            load: s.load,
            gamma_c: s.gamma_c,
            channel,
            tolerance,
            receiver,
            allocation,
        };
        cfg.validate().map_err(|e| CliError::config(e.to_string()))?;
        Ok(cfg)
    }

    pub fn run_settings(&self) -> Result<RunSettings> {
        let r = &self.run;
        let estimator = match r.estimator.unwrap_or(EstimatorName::Exact) {
            EstimatorName::Exact => Estimator::ExactEnum {
                limit: r.enumeration_limit.map_or(DEFAULT_ENUMERATION_LIMIT, u128::from),
            },
            EstimatorName::Mc => Estimator::ConditionedMc {
                samples: r.mc_samples.unwrap_or(DEFAULT_MC_SAMPLES),
                seed: r.seed.unwrap_or(DEFAULT_SEED),
            },
        };
        let settings = RunSettings {
            backend: r.backend,
            seed: r.seed.unwrap_or(DEFAULT_SEED),
            frames: r.frames.unwrap_or(DEFAULT_FRAMES),
            fading_slots: r.samples.unwrap_or(DEFAULT_FADING_SLOTS),
            estimator,
        };
        if settings.frames == 0 || settings.fading_slots == 0 {
            return Err(CliError::config("frames and samples must be positive"));
        }
        if let Estimator::ConditionedMc { samples: 0, .. } = settings.estimator {
            return Err(CliError::config("mc_samples must be positive"));
        }
        Ok(settings)
    }
}

impl RunSettings {
    /// Applies a seed override, keeping a Monte Carlo estimator in step.
    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        if let Estimator::ConditionedMc { samples, .. } = self.estimator {
            self.estimator = Estimator::ConditionedMc { samples, seed };
        }
        self
    }
}
