//! Analytic throughput and packet success rate of the collision model over
//! erasure channels.
//!
//! The public entry points choose between the closed forms in [`closed`] and
//! the direct sums in [`series`]. Closed forms are used whenever they are
//! defined and numerically sound; near `eps1 = 0` they degenerate to `0/0`
//! and the direct sums take over.

pub mod access;
pub mod closed;
pub mod series;

pub use access::{p_access_cs, p_access_ncs, AccessProbs};
pub use closed::ClosedForm;

use crate::error::{check_probability, domain, Error, Result};
use crate::metrics::ServiceMetrics;
use crate::scenario::{Allocation, Receiver, ScenarioConfig, SlotLoads, Tolerance};
use crate::special::DEFAULT_TAIL_MASS;
use series::ToleranceIndex;

/// Below this access erasure probability the closed forms are bypassed.
pub const SINGULAR_EPS1: f64 = 1e-6;

/// Erasure-channel parameters of one deployment, shared by all evaluators.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ErasureModel {
    pub aps: u32,
    pub eps1: f64,
    pub eps2: f64,
    /// Probability mass dropped when truncating each Poisson sum.
    pub tail_mass: f64,
}

impl ErasureModel {
    pub fn new(aps: u32, eps1: f64, eps2: f64) -> Result<Self> {
        if aps == 0 {
            return domain("number of access points must be at least 1");
        }
        check_probability("eps1", eps1)?;
        check_probability("eps2", eps2)?;
        Ok(ErasureModel {
            aps,
            eps1,
            eps2,
            tail_mass: DEFAULT_TAIL_MASS,
        })
    }

    pub fn from_scenario(cfg: &ScenarioConfig) -> Result<Self> {
        let e = cfg.erasure_params()?;
        ErasureModel::new(cfg.aps, e.eps1, e.eps2)
    }

    pub fn with_tail_mass(mut self, tail_mass: f64) -> Result<Self> {
        if !(tail_mass > 0.0 && tail_mass < 1.0) {
            return domain(format!("tail mass {tail_mass} must lie in (0, 1)"));
        }
        self.tail_mass = tail_mass;
        Ok(self)
    }

    /// Composite delivery factor `(1 - eps1)(1 - eps2)`.
    pub fn beta(&self) -> f64 {
        (1.0 - self.eps1) * (1.0 - self.eps2)
    }

    fn closed_usable(&self) -> bool {
        self.eps1 >= SINGULAR_EPS1
    }

    /// Runs `closed` when the closed form is usable and trustworthy, and
    /// `series` otherwise. Orders above the auxiliary-function cap (more
    /// than 64 APs) also go to the series.
    fn pick(&self, closed: impl FnOnce() -> Result<ClosedForm>, series: impl FnOnce() -> Result<f64>) -> Result<f64> {
        if self.closed_usable() {
            match closed() {
                Ok(c) if c.is_reliable() => return Ok(c.value.max(0.0)),
                Ok(_) | Err(Error::UnsupportedOrder { .. }) => {}
                Err(e) => return Err(e),
            }
        }
        series()
    }

    /// CS throughput when only CS devices are active, with per-slot load `g_c`.
    pub fn throughput_cs_single(&self, g_c: f64) -> Result<f64> {
        check_load(g_c)?;
        self.pick(
            || closed::throughput_cs_single(self, g_c),
            || series::throughput_cs_single(self, g_c),
        )
    }

    /// Direct-sum counterpart of [`Self::throughput_cs_single`].
    pub fn reference_series_throughput_cs(&self, g_c: f64) -> Result<f64> {
        check_load(g_c)?;
        series::throughput_cs_single(self, g_c)
    }

    /// CS packet success rate when only CS devices are active.
    pub fn psr_cs_single(&self, g_c: f64) -> Result<f64> {
        check_positive_load(g_c, "CS")?;
        self.pick(|| closed::psr_cs_single(self, g_c), || series::psr_cs_single(self, g_c))
    }

    /// NCS throughput with ideal CS interference tolerance.
    pub fn throughput_ncs_ideal_k(&self, loads: SlotLoads) -> Result<f64> {
        check_loads(loads)?;
        self.pick(
            || closed::throughput_ncs_ideal(self, loads),
            || series::throughput_ncs(self, loads, Tolerance::Infinite),
        )
    }

    /// NCS packet success rate with ideal CS interference tolerance.
    pub fn psr_ncs_ideal_k(&self, loads: SlotLoads) -> Result<f64> {
        check_loads(loads)?;
        check_positive_load(loads.ncs, "NCS")?;
        self.pick(
            || closed::psr_ncs_ideal(self, loads),
            || series::psr_ncs(self, loads, ToleranceIndex::Infinite),
        )
    }

    /// NCS throughput under a finite tolerance, by direct summation.
    pub fn throughput_ncs_finite_k(&self, loads: SlotLoads, k: u32) -> Result<f64> {
        check_loads(loads)?;
        series::throughput_ncs(self, loads, Tolerance::Finite(k))
    }

    /// Closed-form cross-check of [`Self::throughput_ncs_finite_k`].
    pub fn throughput_ncs_finite_k_closed(&self, loads: SlotLoads, k: u32) -> Result<ClosedForm> {
        check_loads(loads)?;
        closed::throughput_ncs_finite(self, loads, k)
    }

    /// NCS packet success rate under a finite tolerance.
    pub fn psr_ncs_finite_k(&self, loads: SlotLoads, k: u32) -> Result<f64> {
        check_loads(loads)?;
        check_positive_load(loads.ncs, "NCS")?;
        series::psr_ncs(self, loads, ToleranceIndex::Finite(i64::from(k)))
    }

    /// NCS packet success rate with the CS retrieval probability of the other
    /// relays evaluated at tolerance `K - 1`.
    pub fn psr_ncs_finite_k_shifted(&self, loads: SlotLoads, k: u32) -> Result<f64> {
        check_loads(loads)?;
        check_positive_load(loads.ncs, "NCS")?;
        series::psr_ncs(self, loads, ToleranceIndex::Finite(i64::from(k) - 1))
    }

    /// CS throughput under a finite tolerance. Uses the closed form when
    /// `L <= K + 1` and the multinomial sum otherwise.
    pub fn throughput_cs_finite_k(&self, loads: SlotLoads, k: u32) -> Result<f64> {
        check_loads(loads)?;
        if u64::from(self.aps) <= u64::from(k) + 1 {
            self.pick(
                || closed::throughput_cs_finite_small(self, loads, k),
                || series::throughput_cs(self, loads, Tolerance::Finite(k)),
            )
        } else {
            series::throughput_cs(self, loads, Tolerance::Finite(k))
        }
    }

    /// CS packet success rate under a finite tolerance.
    pub fn psr_cs_finite_k(&self, loads: SlotLoads, k: u32) -> Result<f64> {
        check_loads(loads)?;
        check_positive_load(loads.cs, "CS")?;
        series::psr_cs(self, loads, Tolerance::Finite(k))
    }

    /// CS packet success rate with the NCS interference count treated as
    /// independent of the CS retrievals at the other relays.
    pub fn psr_cs_finite_k_factorized(&self, loads: SlotLoads, k: u32) -> Result<f64> {
        check_loads(loads)?;
        check_positive_load(loads.cs, "CS")?;
        series::psr_cs_factorized(self, loads, Tolerance::Finite(k))
    }

    /// Probability that at least one AP retrieves a CS packet in a slot.
    pub fn benchmark_bound(&self, g_c: f64) -> Result<f64> {
        check_load(g_c)?;
        self.pick(
            || closed::benchmark_bound(self, g_c),
            || series::benchmark_bound(self, g_c),
        )
    }

    /// All four metrics when both classes contend in every slot. A class with
    /// zero load gets zero throughput and zero success rate.
    pub fn class_metrics(&self, loads: SlotLoads, k: Tolerance) -> Result<ServiceMetrics> {
        check_loads(loads)?;
        let mut out = ServiceMetrics::ZERO;
        if loads.cs > 0.0 {
            if loads.ncs == 0.0 {
                out.r_c = self.throughput_cs_single(loads.cs)?;
                out.gamma_c = self.psr_cs_single(loads.cs)?;
            } else {
                match k {
                    Tolerance::Infinite => {
                        out.r_c = self.throughput_cs_single(loads.cs)?;
                        out.gamma_c = self.psr_cs_single(loads.cs)?;
                    }
                    Tolerance::Finite(k) => {
                        out.r_c = self.throughput_cs_finite_k(loads, k)?;
                        out.gamma_c = self.psr_cs_finite_k(loads, k)?;
                    }
                }
            }
        }
        if loads.ncs > 0.0 {
            match k {
                Tolerance::Infinite => {
                    out.r_cbar = self.throughput_ncs_ideal_k(loads)?;
                    out.gamma_cbar = self.psr_ncs_ideal_k(loads)?;
                }
                Tolerance::Finite(k) => {
                    out.r_cbar = self.throughput_ncs_finite_k(loads, k)?;
                    out.gamma_cbar = self.psr_ncs_finite_k(loads, k)?;
                }
            }
        }
        Ok(out)
    }

    /// Metrics of a single class evaluated alone over its own partition.
    fn single_class(&self, load: Option<f64>) -> Result<(f64, f64)> {
        match load {
            Some(g) if g > 0.0 => Ok((self.throughput_cs_single(g)?, self.psr_cs_single(g)?)),
            _ => Ok((0.0, 0.0)),
        }
    }
}

fn check_load(g: f64) -> Result<()> {
    if g.is_finite() && g >= 0.0 {
        Ok(())
    } else {
        domain(format!("load {g} must be finite and non-negative"))
    }
}

fn check_loads(loads: SlotLoads) -> Result<()> {
    check_load(loads.cs)?;
    check_load(loads.ncs)
}

fn check_positive_load(g: f64, class: &str) -> Result<()> {
    if g > 0.0 {
        Ok(())
    } else {
        domain(format!("packet success rate needs a positive {class} load"))
    }
}

/// Evaluates a collision-receiver scenario over erasure channels.
///
/// Under TDMA each class is evaluated alone on its slot share and its
/// throughput is scaled by that share, so both throughputs stay in packets
/// per frame slot.
pub fn evaluate_erasure(cfg: &ScenarioConfig) -> Result<ServiceMetrics> {
    cfg.validate()?;
    if cfg.receiver != Receiver::Collision {
        return domain("superposition receivers are evaluated by the superposition module");
    }
    let model = ErasureModel::from_scenario(cfg)?;
    match cfg.allocation {
        Allocation::NonOrthogonal => model.class_metrics(cfg.shared_loads(), cfg.tolerance),
        Allocation::Tdma { alpha } => {
            let (cs, ncs) = cfg.tdma_loads(alpha);
            let (r_c, gamma_c) = model.single_class(cs)?;
            let (r_cbar, gamma_cbar) = model.single_class(ncs)?;
            Ok(ServiceMetrics {
                r_c: alpha * r_c,
                r_cbar: (1.0 - alpha) * r_cbar,
                gamma_c,
                gamma_cbar,
            })
        }
    }
}
