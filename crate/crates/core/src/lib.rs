//! Analysis and simulation of two-hop grant-free slotted ALOHA with a
//! critical (CS) and a non-critical (NCS) service class.
//!
//! Devices pick a slot of a `T`-slot frame at random and transmit to `L`
//! access points, which relay whatever they decode to a base station over a
//! shared backhaul. The crate evaluates per-class throughput and packet
//! success rate in closed form for erasure channels, semi-analytically for
//! the superposition receiver, and by Monte Carlo simulation for both the
//! erasure and the Rayleigh-fading models.

pub mod erasure;
pub mod error;
pub mod fading;
pub mod metrics;
pub mod rng;
pub mod sampling;
pub mod scenario;
pub mod sim;
pub mod special;
pub mod superposition;

pub use erasure::{evaluate_erasure, AccessProbs, ErasureModel};
pub use error::{Error, Result};
pub use metrics::{ServiceMetrics, SimEstimate, SimMetrics, METRIC_NAMES};
pub use scenario::{Allocation, Channel, ErasureParams, FadingParams, Receiver, ScenarioConfig, SlotLoads, Tolerance};
