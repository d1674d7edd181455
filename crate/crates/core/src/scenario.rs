//! System description: access points, frame, traffic, channels and the
//! resource-sharing scheme between the two service classes.

use std::fmt;

use crate::error::{check_probability, domain, Result};

/// NCS-to-CS interference tolerance: the largest number of unerased NCS
/// packets a CS decode withstands.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Tolerance {
    Finite(u32),
    Infinite,
}

impl Tolerance {
    pub fn is_finite(self) -> bool {
        matches!(self, Tolerance::Finite(_))
    }

    /// `true` when `count` interfering packets are tolerated.
    pub fn admits(self, count: u64) -> bool {
        match self {
            Tolerance::Finite(k) => count <= u64::from(k),
            Tolerance::Infinite => true,
        }
    }
}

impl fmt::Display for Tolerance {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Tolerance::Finite(k) => write!(f, "{k}"),
            Tolerance::Infinite => f.write_str("inf"),
        }
    }
}

/// Decoding rule applied at the base station.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Receiver {
    /// Any two packets of the same class collide, copies of one message included.
    Collision,
    /// Copies of the same message combine; only distinct messages interfere.
    Superposition,
}

/// Inter-service resource allocation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Allocation {
    /// Both classes contend in every slot of the frame.
    NonOrthogonal,
    /// A fraction `alpha` of the slots is reserved to CS, the rest to NCS.
    Tdma { alpha: f64 },
}

/// Access and backhaul erasure probabilities.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ErasureParams {
    pub eps1: f64,
    pub eps2: f64,
}

impl ErasureParams {
    pub fn new(eps1: f64, eps2: f64) -> Result<Self> {
        check_probability("eps1", eps1)?;
        check_probability("eps2", eps2)?;
        Ok(ErasureParams { eps1, eps2 })
    }

    /// Composite delivery factor `(1 - eps1)(1 - eps2)`.
    pub fn beta(&self) -> f64 {
        (1.0 - self.eps1) * (1.0 - self.eps2)
    }
}

/// Rayleigh fading parameters. Noise has unit power, so powers are SNRs.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FadingParams {
    /// Mean access channel gain.
    pub alpha2: f64,
    /// Mean backhaul channel gain.
    pub beta2: f64,
    pub p_c: f64,
    pub p_cbar: f64,
    pub p_c_ap: f64,
    pub p_cbar_ap: f64,
    /// Rates in bit/s/Hz.
    pub r_c: f64,
    pub r_cbar: f64,
}

impl Default for FadingParams {
    fn default() -> Self {
        FadingParams {
            alpha2: 1.0,
            beta2: 1.0,
            p_c: 10.0,
            p_cbar: 4.0,
            p_c_ap: 10.0,
            p_cbar_ap: 4.0,
            r_c: 1.0,
            r_cbar: 1.0,
        }
    }
}

impl FadingParams {
    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("alpha2", self.alpha2),
            ("beta2", self.beta2),
            ("r_c", self.r_c),
            ("r_cbar", self.r_cbar),
        ];
        for (name, v) in positive {
            if !(v.is_finite() && v > 0.0) {
                return domain(format!("{name} = {v} must be positive"));
            }
        }
        let powers = [
            ("p_c", self.p_c),
            ("p_cbar", self.p_cbar),
            ("p_c_ap", self.p_c_ap),
            ("p_cbar_ap", self.p_cbar_ap),
        ];
        for (name, v) in powers {
            if !(v.is_finite() && v >= 0.0) {
                return domain(format!("{name} = {v} must be non-negative"));
            }
        }
        if self.p_c < self.p_cbar {
            return domain(format!(
                "CS power {} must not be below NCS power {}",
                self.p_c, self.p_cbar
            ));
        }
        Ok(())
    }

    /// SINR decoding threshold `2^r - 1`.
    pub fn threshold(rate: f64) -> f64 {
        rate.exp2() - 1.0
    }
}

/// Channel model: exactly one of erasure or fading.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Channel {
    Erasure(ErasureParams),
    Fading(FadingParams),
}

/// Per-slot Poisson loads of the two classes, in packet/slot.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SlotLoads {
    pub cs: f64,
    pub ncs: f64,
}

impl SlotLoads {
    pub fn total(&self) -> f64 {
        self.cs + self.ncs
    }
}

/// Full system description.
#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioConfig {
    /// Number of access points `L`.
    pub aps: u32,
    /// Slots per frame `T`.
    pub slots: u32,
    /// Total load `G` in packet/frame.
    pub load: f64,
    /// Fraction of the load generated by CS devices.
    pub gamma_c: f64,
    pub channel: Channel,
    pub tolerance: Tolerance,
    pub receiver: Receiver,
    pub allocation: Allocation,
}

impl ScenarioConfig {
    /// Collision receiver, non-orthogonal sharing, ideal tolerance.
    pub fn erasure(aps: u32, slots: u32, load: f64, gamma_c: f64, eps1: f64, eps2: f64) -> Self {
        ScenarioConfig {
            aps,
            slots,
            load,
            gamma_c,
            channel: Channel::Erasure(ErasureParams { eps1, eps2 }),
            tolerance: Tolerance::Infinite,
            receiver: Receiver::Collision,
            allocation: Allocation::NonOrthogonal,
        }
    }

    pub fn fading(aps: u32, slots: u32, load: f64, gamma_c: f64, params: FadingParams) -> Self {
        ScenarioConfig {
            aps,
            slots,
            load,
            gamma_c,
            channel: Channel::Fading(params),
            tolerance: Tolerance::Infinite,
            receiver: Receiver::Superposition,
            allocation: Allocation::NonOrthogonal,
        }
    }

    pub fn with_tolerance(mut self, tolerance: Tolerance) -> Self {
        self.tolerance = tolerance;
        self
    }

    pub fn with_receiver(mut self, receiver: Receiver) -> Self {
        self.receiver = receiver;
        self
    }

    pub fn with_allocation(mut self, allocation: Allocation) -> Self {
        self.allocation = allocation;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.aps == 0 {
            return domain("number of access points must be at least 1");
        }
        if self.slots == 0 {
            return domain("slots per frame must be at least 1");
        }
        if !(self.load.is_finite() && self.load >= 0.0) {
            return domain(format!("load {} must be finite and non-negative", self.load));
        }
        check_probability("gamma_c", self.gamma_c)?;
        if let Allocation::Tdma { alpha } = self.allocation {
            check_probability("alpha", alpha)?;
        }
        match &self.channel {
            Channel::Erasure(e) => {
                check_probability("eps1", e.eps1)?;
                check_probability("eps2", e.eps2)?;
            }
            Channel::Fading(f) => f.validate()?,
        }
        Ok(())
    }

    pub fn erasure_params(&self) -> Result<ErasureParams> {
        match self.channel {
            Channel::Erasure(e) => Ok(e),
            Channel::Fading(_) => domain("scenario uses the fading channel, not erasures"),
        }
    }

    pub fn fading_params(&self) -> Result<FadingParams> {
        match self.channel {
            Channel::Fading(f) => Ok(f),
            Channel::Erasure(_) => domain("scenario uses the erasure channel, not fading"),
        }
    }

    /// Per-slot loads when both classes share the whole frame.
    pub fn shared_loads(&self) -> SlotLoads {
        let t = f64::from(self.slots);
        SlotLoads {
            cs: self.gamma_c * self.load / t,
            ncs: (1.0 - self.gamma_c) * self.load / t,
        }
    }

    /// Per-slot load of each class inside its TDMA partition; `None` for a
    /// class that receives no slots.
    pub fn tdma_loads(&self, alpha: f64) -> (Option<f64>, Option<f64>) {
        let t = f64::from(self.slots);
        let cs = (alpha > 0.0).then(|| self.gamma_c * self.load / (alpha * t));
        let ncs = (alpha < 1.0).then(|| (1.0 - self.gamma_c) * self.load / ((1.0 - alpha) * t));
        (cs, ncs)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn thinning_loads() {
        let cfg = ScenarioConfig::erasure(3, 4, 8.0, 0.25, 0.5, 0.5);
        let l = cfg.shared_loads();
        assert_eq!(l.cs, 0.5);
        assert_eq!(l.ncs, 1.5);
        let (cs, ncs) = cfg.tdma_loads(0.5);
        assert_eq!(cs, Some(1.0));
        assert_eq!(ncs, Some(3.0));
        assert_eq!(cfg.tdma_loads(1.0).1, None);
        assert_eq!(cfg.tdma_loads(0.0).0, None);
    }

    #[test]
    fn validation() {
        assert!(ScenarioConfig::erasure(0, 4, 8.0, 0.5, 0.5, 0.5).validate().is_err());
        assert!(ScenarioConfig::erasure(1, 0, 8.0, 0.5, 0.5, 0.5).validate().is_err());
        assert!(ScenarioConfig::erasure(1, 1, -1.0, 0.5, 0.5, 0.5).validate().is_err());
        assert!(ScenarioConfig::erasure(1, 1, 1.0, 1.5, 0.5, 0.5).validate().is_err());
        assert!(ScenarioConfig::erasure(1, 1, 1.0, 0.5, 1.5, 0.5).validate().is_err());
        assert!(ErasureParams::new(0.2, -0.1).is_err());
        let f = FadingParams {
            p_c: 1.0,
            p_cbar: 2.0,
            ..Default::default()
        };
        assert!(f.validate().is_err());
        let f = FadingParams {
            alpha2: 0.0,
            ..Default::default()
        };
        assert!(f.validate().is_err());
        assert!(FadingParams::default().validate().is_ok());
    }

    #[test]
    fn tolerance_admits() {
        assert!(Tolerance::Finite(2).admits(2));
        assert!(!Tolerance::Finite(2).admits(3));
        assert!(Tolerance::Infinite.admits(u64::MAX));
        assert_eq!(Tolerance::Infinite.to_string(), "inf");
    }
}
