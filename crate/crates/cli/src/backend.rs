//! Evaluation of one scenario point by any of the backends.

use gfra_core::fading::estimate_fading_metrics;
use gfra_core::sim::run_erasure;
use gfra_core::superposition::{evaluate_superposition, Estimator};
use gfra_core::{evaluate_erasure, Channel, Receiver, ScenarioConfig, ServiceMetrics, SimMetrics};

use crate::config::{BackendKind, RunSettings};
use crate::error::{CliError, Result};

/// A backend with everything it needs to run.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Backend {
    Analytic,
    Sim { frames: u64, seed: u64 },
    Fading { slots: u64, seed: u64 },
    Superposition(Estimator),
}

impl Backend {
    /// Resolves `kind`, or the natural backend of the channel when `None`.
    pub fn resolve(kind: Option<BackendKind>, cfg: &ScenarioConfig, run: &RunSettings) -> Self {
        let kind = kind.unwrap_or(match cfg.channel {
            Channel::Erasure(_) => BackendKind::Analytic,
            Channel::Fading(_) => BackendKind::Fading,
        });
        match kind {
            BackendKind::Analytic => Backend::Analytic,
            BackendKind::Sim => Backend::Sim {
                frames: run.frames,
                seed: run.seed,
            },
            BackendKind::Fading => Backend::Fading {
                slots: run.fading_slots,
                seed: run.seed,
            },
            BackendKind::Superposition => Backend::Superposition(run.estimator),
        }
    }

    /// `true` when results carry standard errors and a seed.
    pub fn is_stochastic(&self) -> bool {
        match self {
            Backend::Analytic => false,
            Backend::Sim { .. } | Backend::Fading { .. } => true,
            Backend::Superposition(e) => matches!(e, Estimator::ConditionedMc { .. }),
        }
    }

    pub fn seed(&self) -> Option<u64> {
        match *self {
            Backend::Analytic | Backend::Superposition(Estimator::ExactEnum { .. }) => None,
            Backend::Sim { seed, .. } | Backend::Fading { seed, .. } => Some(seed),
            Backend::Superposition(Estimator::ConditionedMc { seed, .. }) => Some(seed),
        }
    }

    pub fn check_compatible(&self, cfg: &ScenarioConfig) -> Result<()> {
        let fading = matches!(cfg.channel, Channel::Fading(_));
        match (self, fading) {
            (Backend::Fading { .. }, false) => Err(CliError::config("the fading backend needs a [fading] channel")),
            (Backend::Fading { .. }, true) => Ok(()),
            (_, true) => Err(CliError::config(
                "a [fading] channel is only evaluated by the fading backend",
            )),
            (_, false) => Ok(()),
        }
    }
}

/// Metrics of one point, with standard errors for stochastic backends.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PointResult {
    pub metrics: ServiceMetrics,
    pub std_error: Option<ServiceMetrics>,
    pub seed: Option<u64>,
}

impl PointResult {
    fn from_sim(m: SimMetrics, seed: u64) -> Self {
        let se = m.as_array().map(|e| e.std_error);
        PointResult {
            metrics: m.means(),
            std_error: Some(ServiceMetrics {
                r_c: se[0],
                r_cbar: se[1],
                gamma_c: se[2],
                gamma_cbar: se[3],
            }),
            seed: Some(seed),
        }
    }
}

pub fn evaluate(cfg: &ScenarioConfig, backend: &Backend) -> Result<PointResult> {
    backend.check_compatible(cfg)?;
    let exact = |metrics| PointResult {
        metrics,
        std_error: None,
        seed: None,
    };
    match *backend {
        Backend::Analytic => match cfg.receiver {
            Receiver::Collision => Ok(exact(evaluate_erasure(cfg)?)),
            Receiver::Superposition => Ok(exact(evaluate_superposition(cfg, Estimator::default())?.metrics)),
        },
        Backend::Sim { frames, seed } => Ok(PointResult::from_sim(
            run_erasure(cfg, frames, seed)?.metrics(cfg.receiver),
            seed,
        )),
        Backend::Fading { slots, seed } => Ok(PointResult::from_sim(estimate_fading_metrics(cfg, slots, seed)?, seed)),
        Backend::Superposition(estimator) => {
            let cfg = cfg.clone().with_receiver(Receiver::Superposition);
            let est = evaluate_superposition(&cfg, estimator)?;
            Ok(PointResult {
                metrics: est.metrics,
                std_error: backend.is_stochastic().then_some(est.std_error),
                seed: backend.seed(),
            })
        }
    }
}
