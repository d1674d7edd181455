//! Scenarios shared by the benchmarks.

use gfra_core::{FadingParams, ScenarioConfig, Tolerance};

/// Two-service erasure scenario with three relays and a finite tolerance.
pub fn erasure_mixed() -> ScenarioConfig {
    ScenarioConfig::erasure(3, 4, 8.0, 0.5, 0.4, 0.4).with_tolerance(Tolerance::Finite(2))
}

/// Single-service erasure scenario at a given relay count.
pub fn erasure_single(aps: u32) -> ScenarioConfig {
    ScenarioConfig::erasure(aps, 8, 16.0, 1.0, 0.5, 0.5)
}

pub fn fading_mixed() -> ScenarioConfig {
    ScenarioConfig::fading(3, 4, 20.0, 0.5, FadingParams::default())
}
