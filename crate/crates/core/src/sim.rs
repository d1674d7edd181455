//! Slot-level Monte Carlo simulation of the two-hop protocol over erasure
//! channels.
//!
//! Each frame draws Poisson device counts for both classes, places every
//! device in a uniformly chosen slot of its partition, erases each
//! (device, AP) link independently and applies the AP rule. An AP that
//! retrieves a packet forwards it in the next backhaul slot; the backhaul
//! slot following access slot `t` carries only packets from slot `t`, so a
//! frame of `T` access slots occupies `T + 1` backhaul slots and no packet is
//! lost at the frame boundary. Both base-station rules are applied to the
//! same realization.
//!
//! Packet success rates tag one uniformly chosen device in every slot where
//! its class is active, so the success frequency is an average over
//! non-empty slots.

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Poisson};
use rayon::prelude::*;

use crate::error::{domain, Result};
use crate::metrics::{SimEstimate, SimMetrics};
use crate::rng::{substream, Purpose};
use crate::scenario::{Allocation, Receiver, ScenarioConfig, Tolerance};

/// Frames simulated by one work item. Fixed so that results do not depend
/// on the number of worker threads.
const FRAMES_PER_CHUNK: u64 = 256;

/// What an access point retrieved in a slot.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Decoded {
    Silent,
    /// Index of the CS device within the slot.
    Cs(u32),
    /// Index of the NCS device within the slot.
    Ncs(u32),
}

/// Messages decoded by a base station rule in one slot.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct BsOutcome {
    pub cs: Option<u32>,
    pub ncs: Option<u32>,
}

/// One simulated slot: AP states, backhaul erasures and both BS outcomes.
#[derive(Debug, Clone, PartialEq)]
pub struct SlotRealization {
    pub n_c: u32,
    pub n_cbar: u32,
    pub ap_decoded: Vec<Decoded>,
    /// `true` when the AP's backhaul packet arrives unerased. Always `false`
    /// for a silent AP.
    pub backhaul_ok: Vec<bool>,
    pub collision: BsOutcome,
    pub superposition: BsOutcome,
}

impl SlotRealization {
    pub fn outcome(&self, receiver: Receiver) -> BsOutcome {
        match receiver {
            Receiver::Collision => self.collision,
            Receiver::Superposition => self.superposition,
        }
    }

    /// At least one AP retrieved a CS packet.
    pub fn any_ap_cs(&self) -> bool {
        self.ap_decoded.iter().any(|d| matches!(d, Decoded::Cs(_)))
    }
}

/// Channel and decoding parameters of a slot.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SlotParams {
    pub aps: u32,
    pub eps1: f64,
    pub eps2: f64,
    pub tolerance: Tolerance,
}

/// Applies the AP rule: a CS packet is retrieved when exactly one CS packet
/// and at most `K` NCS packets arrive unerased, an NCS packet when it is the
/// only unerased arrival.
fn access<R: Rng + ?Sized>(rng: &mut R, n_c: u32, n_cbar: u32, p: &SlotParams) -> Decoded {
    let keep = 1.0 - p.eps1;
    let (mut cs, mut cs_idx) = (0u32, 0u32);
    for i in 0..n_c {
        if rng.random_bool(keep) {
            cs += 1;
            cs_idx = i;
        }
    }
    let (mut ncs, mut ncs_idx) = (0u32, 0u32);
    for i in 0..n_cbar {
        if rng.random_bool(keep) {
            ncs += 1;
            ncs_idx = i;
        }
    }
    if cs == 1 && p.tolerance.admits(u64::from(ncs)) {
        Decoded::Cs(cs_idx)
    } else if cs == 0 && ncs == 1 {
        Decoded::Ncs(ncs_idx)
    } else {
        Decoded::Silent
    }
}

/// Records message `i`; `distinct` saturates at 2, which is all the rules need.
fn note_message(first: &mut Option<u32>, distinct: &mut u32, i: u32) {
    match *first {
        None => {
            *first = Some(i);
            *distinct = 1;
        }
        Some(f) if f != i => *distinct = 2,
        Some(_) => {}
    }
}

/// Both BS rules over the copies that survived the backhaul.
fn base_station(received: &[Decoded], k: Tolerance) -> (BsOutcome, BsOutcome) {
    let mut cs_copies = 0u64;
    let mut ncs_copies = 0u64;
    let mut cs_msg: Option<u32> = None;
    let mut ncs_msg: Option<u32> = None;
    let mut cs_distinct = 0u32;
    let mut ncs_distinct = 0u32;
    for d in received {
        match *d {
            Decoded::Cs(i) => {
                cs_copies += 1;
                note_message(&mut cs_msg, &mut cs_distinct, i);
            }
            Decoded::Ncs(i) => {
                ncs_copies += 1;
                note_message(&mut ncs_msg, &mut ncs_distinct, i);
            }
            Decoded::Silent => {}
        }
    }
    let collision = BsOutcome {
        cs: (cs_copies == 1 && k.admits(ncs_copies)).then_some(cs_msg).flatten(),
        ncs: (cs_copies == 0 && ncs_copies == 1).then_some(ncs_msg).flatten(),
    };
    let superposition = BsOutcome {
        cs: (cs_distinct == 1 && k.admits(ncs_copies)).then_some(cs_msg).flatten(),
        ncs: (cs_copies == 0 && ncs_distinct == 1).then_some(ncs_msg).flatten(),
    };
    (collision, superposition)
}

/// Simulates one slot with `n_c` CS and `n_cbar` NCS devices.
pub fn simulate_slot<R: Rng + ?Sized>(rng: &mut R, n_c: u32, n_cbar: u32, p: &SlotParams) -> SlotRealization {
    let l = p.aps as usize;
    let mut ap_decoded = Vec::with_capacity(l);
    let mut backhaul_ok = Vec::with_capacity(l);
    let mut received = Vec::with_capacity(l);
    for _ in 0..l {
        let d = access(rng, n_c, n_cbar, p);
        let ok = d != Decoded::Silent && rng.random_bool(1.0 - p.eps2);
        if ok {
            received.push(d);
        }
        ap_decoded.push(d);
        backhaul_ok.push(ok);
    }
    let (collision, superposition) = base_station(&received, p.tolerance);
    SlotRealization {
        n_c,
        n_cbar,
        ap_decoded,
        backhaul_ok,
        collision,
        superposition,
    }
}

/// Integer tallies of one receiver rule.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
struct ReceiverTally {
    cs_sum: u64,
    cs_sq: u64,
    ncs_sum: u64,
    ncs_sq: u64,
    cs_tag_success: u64,
    ncs_tag_success: u64,
    /// Sum over active slots of the fraction of active devices delivered.
    cs_device_share: f64,
    ncs_device_share: f64,
}

#[derive(Debug, Clone, Copy, Default, PartialEq)]
struct Tally {
    frames: u64,
    rx: [ReceiverTally; 2],
    cs_tag_trials: u64,
    ncs_tag_trials: u64,
    uplink_sum: u64,
    uplink_sq: u64,
    violations: u64,
}

impl Tally {
    fn merge(&mut self, o: &Tally) {
        self.frames += o.frames;
        for (a, b) in self.rx.iter_mut().zip(&o.rx) {
            a.cs_sum += b.cs_sum;
            a.cs_sq += b.cs_sq;
            a.ncs_sum += b.ncs_sum;
            a.ncs_sq += b.ncs_sq;
            a.cs_tag_success += b.cs_tag_success;
            a.ncs_tag_success += b.ncs_tag_success;
            a.cs_device_share += b.cs_device_share;
            a.ncs_device_share += b.ncs_device_share;
        }
        self.cs_tag_trials += o.cs_tag_trials;
        self.ncs_tag_trials += o.ncs_tag_trials;
        self.uplink_sum += o.uplink_sum;
        self.uplink_sq += o.uplink_sq;
        self.violations += o.violations;
    }
}

/// Slot partition of the frame: `(first, count)` for each class.
#[derive(Debug, Clone, Copy)]
struct Layout {
    slots: u32,
    cs: (u32, u32),
    ncs: (u32, u32),
}

impl Layout {
    fn new(cfg: &ScenarioConfig) -> Self {
        let t = cfg.slots;
        match cfg.allocation {
            Allocation::NonOrthogonal => Layout {
                slots: t,
                cs: (0, t),
                ncs: (0, t),
            },
            Allocation::Tdma { alpha } => {
                let cs = cs_slot_count(alpha, t);
                Layout {
                    slots: t,
                    cs: (0, cs),
                    ncs: (cs, t - cs),
                }
            }
        }
    }
}

/// Slots reserved to CS under TDMA: `alpha * T` rounded half away from zero.
pub fn cs_slot_count(alpha: f64, slots: u32) -> u32 {
    ((alpha * f64::from(slots)).round() as u32).min(slots)
}

fn poisson_count<R: Rng + ?Sized>(rng: &mut R, mean: f64) -> u64 {
    if mean <= 0.0 {
        return 0;
    }
    // the mean was validated as finite and positive
    Poisson::new(mean).map(|d| d.sample(rng) as u64).unwrap_or(0)
}

fn simulate_frame(rng: &mut ChaCha8Rng, cfg: &ScenarioConfig, layout: &Layout, p: &SlotParams, tally: &mut Tally) {
    let t = layout.slots as usize;
    let mut n_c = vec![0u32; t];
    let mut n_cbar = vec![0u32; t];
    if layout.cs.1 > 0 {
        for _ in 0..poisson_count(rng, cfg.gamma_c * cfg.load) {
            n_c[(layout.cs.0 + rng.random_range(0..layout.cs.1)) as usize] += 1;
        }
    }
    if layout.ncs.1 > 0 {
        for _ in 0..poisson_count(rng, (1.0 - cfg.gamma_c) * cfg.load) {
            n_cbar[(layout.ncs.0 + rng.random_range(0..layout.ncs.1)) as usize] += 1;
        }
    }
    let mut succ = [[0u64; 2]; 2];
    let mut uplink = 0u64;
    for s in 0..t {
        let (nc, nb) = (n_c[s], n_cbar[s]);
        if nc + nb == 0 {
            continue;
        }
        let slot = simulate_slot(rng, nc, nb, p);
        uplink += u64::from(slot.any_ap_cs());
        let cs_tag = (nc > 0).then(|| rng.random_range(0..nc));
        let ncs_tag = (nb > 0).then(|| rng.random_range(0..nb));
        tally.cs_tag_trials += u64::from(cs_tag.is_some());
        tally.ncs_tag_trials += u64::from(ncs_tag.is_some());
        let outcomes = [slot.collision, slot.superposition];
        for (r, o) in outcomes.iter().enumerate() {
            let rx = &mut tally.rx[r];
            if let Some(c) = o.cs {
                succ[r][0] += 1;
                rx.cs_tag_success += u64::from(cs_tag == Some(c));
                rx.cs_device_share += 1.0 / f64::from(nc);
            }
            if let Some(c) = o.ncs {
                succ[r][1] += 1;
                rx.ncs_tag_success += u64::from(ncs_tag == Some(c));
                rx.ncs_device_share += 1.0 / f64::from(nb);
            }
        }
        let [col, sup] = outcomes;
        tally.violations += u64::from(col.cs.is_some() && sup.cs.is_none());
        tally.violations += u64::from(col.ncs.is_some() && sup.ncs.is_none());
    }
    tally.frames += 1;
    for (rx, s) in tally.rx.iter_mut().zip(succ) {
        rx.cs_sum += s[0];
        rx.cs_sq += s[0] * s[0];
        rx.ncs_sum += s[1];
        rx.ncs_sq += s[1] * s[1];
    }
    tally.uplink_sum += uplink;
    tally.uplink_sq += uplink * uplink;
}

fn run(cfg: &ScenarioConfig, n_frames: u64, seed: u64) -> Result<Tally> {
    cfg.validate()?;
    if n_frames == 0 {
        return domain("number of frames must be at least 1");
    }
    let e = cfg.erasure_params()?;
    let p = SlotParams {
        aps: cfg.aps,
        eps1: e.eps1,
        eps2: e.eps2,
        tolerance: cfg.tolerance,
    };
    let layout = Layout::new(cfg);
    let chunks = n_frames.div_ceil(FRAMES_PER_CHUNK);
    let parts: Vec<Tally> = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let mut tally = Tally::default();
            let end = ((c + 1) * FRAMES_PER_CHUNK).min(n_frames);
            for f in c * FRAMES_PER_CHUNK..end {
                let mut rng = substream(seed, Purpose::ErasureFrame, f);
                simulate_frame(&mut rng, cfg, &layout, &p, &mut tally);
            }
            tally
        })
        .collect();
    let mut total = Tally::default();
    for part in &parts {
        total.merge(part);
    }
    Ok(total)
}

/// Everything measured in one simulation run.
#[derive(Debug, Clone, PartialEq)]
pub struct ErasureSimulation {
    pub collision: SimMetrics,
    pub superposition: SimMetrics,
    /// Fraction of slots in which at least one AP retrieves a CS packet.
    pub uplink_cs_any: SimEstimate,
    /// Success rates averaged over every active device of each active slot
    /// rather than over one tagged device, indexed `[receiver][class]` with
    /// collision first and CS first.
    pub psr_all_devices: [[f64; 2]; 2],
    /// Slots in which the collision receiver delivers a class and the
    /// superposition receiver does not.
    pub violations: u64,
    /// A class with positive load received no slots.
    pub starved_class: bool,
    pub frames: u64,
    pub seed: u64,
}

impl ErasureSimulation {
    pub fn metrics(&self, receiver: Receiver) -> SimMetrics {
        match receiver {
            Receiver::Collision => self.collision,
            Receiver::Superposition => self.superposition,
        }
    }
}

/// Simulates `n_frames` frames and reports both receiver rules.
pub fn run_erasure(cfg: &ScenarioConfig, n_frames: u64, seed: u64) -> Result<ErasureSimulation> {
    let tally = run(cfg, n_frames, seed)?;
    let layout = Layout::new(cfg);
    let t = f64::from(cfg.slots);
    let metrics = |rx: &ReceiverTally| SimMetrics {
        r_c: SimEstimate::from_integer_sums(rx.cs_sum, rx.cs_sq, tally.frames, t, seed),
        r_cbar: SimEstimate::from_integer_sums(rx.ncs_sum, rx.ncs_sq, tally.frames, t, seed),
        gamma_c: SimEstimate::from_bernoulli(rx.cs_tag_success, tally.cs_tag_trials, seed),
        gamma_cbar: SimEstimate::from_bernoulli(rx.ncs_tag_success, tally.ncs_tag_trials, seed),
    };
    let share = |x: f64, n: u64| if n == 0 { 0.0 } else { x / n as f64 };
    let psr_all = |rx: &ReceiverTally| {
        [
            share(rx.cs_device_share, tally.cs_tag_trials),
            share(rx.ncs_device_share, tally.ncs_tag_trials),
        ]
    };
    let starved = (layout.cs.1 == 0 && cfg.gamma_c * cfg.load > 0.0)
        || (layout.ncs.1 == 0 && (1.0 - cfg.gamma_c) * cfg.load > 0.0);
    Ok(ErasureSimulation {
        collision: metrics(&tally.rx[0]),
        superposition: metrics(&tally.rx[1]),
        uplink_cs_any: SimEstimate::from_integer_sums(tally.uplink_sum, tally.uplink_sq, tally.frames, t, seed),
        psr_all_devices: [psr_all(&tally.rx[0]), psr_all(&tally.rx[1])],
        violations: tally.violations,
        starved_class: starved,
        frames: tally.frames,
        seed,
    })
}

/// Monte Carlo estimates of the four metrics under the configured receiver.
pub fn simulate_frames(cfg: &ScenarioConfig, n_frames: u64, seed: u64) -> Result<SimMetrics> {
    Ok(run_erasure(cfg, n_frames, seed)?.metrics(cfg.receiver))
}

/// TDMA simulation result.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TdmaSimulation {
    pub metrics: SimMetrics,
    /// A class with positive load received no slots; its metrics are zero.
    pub starved_class: bool,
}

/// Simulates a TDMA scenario. CS gets `round(alpha * T)` slots and NCS the
/// rest; throughputs are counted per frame slot.
pub fn simulate_tdma(cfg: &ScenarioConfig, n_frames: u64, seed: u64) -> Result<TdmaSimulation> {
    if !matches!(cfg.allocation, Allocation::Tdma { .. }) {
        return domain("TDMA simulation needs a TDMA allocation");
    }
    let sim = run_erasure(cfg, n_frames, seed)?;
    Ok(TdmaSimulation {
        metrics: sim.metrics(cfg.receiver),
        starved_class: sim.starved_class,
    })
}

/// Runs both receiver rules on the same realizations and counts slots where
/// the collision receiver succeeds for a class but the superposition
/// receiver fails.
pub fn coupled_compare(cfg: &ScenarioConfig, n_frames: u64, seed: u64) -> Result<u64> {
    Ok(run(cfg, n_frames, seed)?.violations)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::substream;

    fn params(aps: u32, eps1: f64, eps2: f64, tolerance: Tolerance) -> SlotParams {
        SlotParams {
            aps,
            eps1,
            eps2,
            tolerance,
        }
    }

    #[test]
    fn base_station_rules() {
        use Decoded::*;
        let inf = Tolerance::Infinite;
        let (c, s) = base_station(&[Cs(0), Cs(0)], inf);
        assert_eq!(c.cs, None);
        assert_eq!(s.cs, Some(0));
        let (c, s) = base_station(&[Cs(0), Cs(1)], inf);
        assert_eq!((c.cs, s.cs), (None, None));
        let (c, s) = base_station(&[Cs(1), Ncs(0), Ncs(1)], Tolerance::Finite(1));
        assert_eq!((c.cs, s.cs), (None, None));
        let (c, s) = base_station(&[Cs(1), Ncs(0)], Tolerance::Finite(1));
        assert_eq!((c.cs, s.cs, c.ncs, s.ncs), (Some(1), Some(1), None, None));
        let (c, s) = base_station(&[Ncs(2), Ncs(2)], inf);
        assert_eq!((c.ncs, s.ncs), (None, Some(2)));
        let (c, s) = base_station(&[Ncs(2), Ncs(2), Ncs(0)], inf);
        assert_eq!((c.ncs, s.ncs), (None, None));
        let (c, s) = base_station(&[Cs(0), Cs(1), Cs(0)], inf);
        assert_eq!((c.cs, s.cs), (None, None));
        assert_eq!(base_station(&[], inf), (BsOutcome::default(), BsOutcome::default()));
    }

    #[test]
    fn access_rule() {
        let mut rng = substream(1, Purpose::ErasureFrame, 0);
        let perfect = params(1, 0.0, 0.0, Tolerance::Finite(0));
        assert_eq!(access(&mut rng, 1, 0, &perfect), Decoded::Cs(0));
        assert_eq!(access(&mut rng, 1, 1, &perfect), Decoded::Silent);
        assert_eq!(access(&mut rng, 0, 1, &perfect), Decoded::Ncs(0));
        assert_eq!(access(&mut rng, 2, 0, &perfect), Decoded::Silent);
        let tolerant = params(1, 0.0, 0.0, Tolerance::Finite(3));
        assert_eq!(access(&mut rng, 1, 3, &tolerant), Decoded::Cs(0));
        let dead = params(1, 1.0, 0.0, Tolerance::Infinite);
        assert_eq!(access(&mut rng, 4, 4, &dead), Decoded::Silent);
    }

    #[test]
    fn single_ap_outcomes_coincide() {
        let mut rng = substream(9, Purpose::ErasureFrame, 0);
        let p = params(1, 0.3, 0.2, Tolerance::Finite(1));
        for i in 0..2000 {
            let s = simulate_slot(&mut rng, i % 3, (i / 3) % 3, &p);
            assert_eq!(s.collision, s.superposition);
        }
    }

    #[test]
    fn zero_frames_rejected() {
        let cfg = ScenarioConfig::erasure(2, 2, 1.0, 0.5, 0.5, 0.5);
        assert!(simulate_frames(&cfg, 0, 1).is_err());
    }

    #[test]
    fn slot_split() {
        assert_eq!(cs_slot_count(0.5, 4), 2);
        assert_eq!(cs_slot_count(0.5, 3), 2);
        assert_eq!(cs_slot_count(0.0, 3), 0);
        assert_eq!(cs_slot_count(1.0, 3), 3);
    }
}
