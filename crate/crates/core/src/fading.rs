//! Monte Carlo engine for the Rayleigh-fading two-hop model.
//!
//! Each AP attempts only the message with the largest SINR and keeps it when
//! the SINR clears the Shannon threshold `2^r - 1` of its class. The BS sees
//! the coherent sum of the backhaul channels of all APs forwarding the same
//! message and, again, attempts only the strongest message.

use rand::Rng;
use rand_distr::{Distribution, Poisson, StandardNormal};
use rayon::prelude::*;

use crate::error::{domain, Result};
use crate::metrics::{SimEstimate, SimMetrics};
use crate::rng::{substream, Purpose};
use crate::scenario::{Allocation, FadingParams, ScenarioConfig, SlotLoads};

/// Slots simulated by one work item.
const SLOTS_PER_CHUNK: u64 = 4096;

/// Circularly-symmetric complex Gaussian sample as `(re, im)`.
pub fn sample_complex_gain<R: Rng + ?Sized>(rng: &mut R, mean_gain: f64) -> (f64, f64) {
    let sd = (mean_gain / 2.0).sqrt();
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    (sd * re, sd * im)
}

/// Squared magnitude of a complex Gaussian gain with mean `mean_gain`.
pub fn sample_power_gain<R: Rng + ?Sized>(rng: &mut R, mean_gain: f64) -> f64 {
    let (re, im) = sample_complex_gain(rng, mean_gain);
    re * re + im * im
}

/// Strongest-SINR message among `received` powers and whether it clears its
/// threshold. Ties go to the lowest index.
fn strongest(received: &[f64], threshold: impl Fn(usize) -> f64) -> Option<usize> {
    let total: f64 = received.iter().sum();
    let mut best: Option<(usize, f64)> = None;
    for (m, &s) in received.iter().enumerate() {
        let sinr = s / (1.0 + (total - s).max(0.0));
        if best.is_none_or(|(_, b)| sinr > b) {
            best = Some((m, sinr));
        }
    }
    best.filter(|&(m, sinr)| sinr > 0.0 && sinr >= threshold(m))
        .map(|(m, _)| m)
}

/// Per-AP decoding. `access_gains[l][m]` is `|h_{l,m}|^2`; messages
/// `0..n_c` are CS and the rest NCS. Returns the decoded message per AP.
pub fn ap_decode(access_gains: &[Vec<f64>], n_c: usize, params: &FadingParams) -> Vec<Option<usize>> {
    let th = (
        FadingParams::threshold(params.r_c),
        FadingParams::threshold(params.r_cbar),
    );
    access_gains
        .iter()
        .map(|gains| {
            let received: Vec<f64> = gains
                .iter()
                .enumerate()
                .map(|(m, g)| g * if m < n_c { params.p_c } else { params.p_cbar })
                .collect();
            strongest(&received, |m| if m < n_c { th.0 } else { th.1 })
        })
        .collect()
}

/// BS decoding over the messages forwarded by the APs. `backhaul[l]` is the
/// complex gain `g_l`; copies of one message add coherently.
pub fn bs_decode(
    ap_decoded: &[Option<usize>],
    backhaul: &[(f64, f64)],
    n_c: usize,
    params: &FadingParams,
) -> Option<usize> {
    let mut messages: Vec<usize> = ap_decoded.iter().flatten().copied().collect();
    messages.sort_unstable();
    messages.dedup();
    if messages.is_empty() {
        return None;
    }
    let received: Vec<f64> = messages
        .iter()
        .map(|&m| {
            let (re, im) = ap_decoded
                .iter()
                .zip(backhaul)
                .filter(|(d, _)| **d == Some(m))
                .fold((0.0, 0.0), |acc, (_, g)| (acc.0 + g.0, acc.1 + g.1));
            let power = if m < n_c { params.p_c_ap } else { params.p_cbar_ap };
            (re * re + im * im) * power
        })
        .collect();
    let th = (
        FadingParams::threshold(params.r_c),
        FadingParams::threshold(params.r_cbar),
    );
    strongest(&received, |i| if messages[i] < n_c { th.0 } else { th.1 }).map(|i| messages[i])
}

/// Channel draws and decisions of one slot.
#[derive(Debug, Clone, PartialEq)]
pub struct FadingSlot {
    pub n_c: usize,
    pub n_cbar: usize,
    /// `|h_{l,m}|^2` per AP and message.
    pub access_gains: Vec<Vec<f64>>,
    pub backhaul: Vec<(f64, f64)>,
    pub ap_decoded: Vec<Option<usize>>,
    pub bs_decoded: Option<usize>,
}

/// Draws all channels of a slot with the given message counts and decodes.
pub fn simulate_fading_slot<R: Rng + ?Sized>(
    rng: &mut R,
    aps: u32,
    n_c: usize,
    n_cbar: usize,
    params: &FadingParams,
) -> FadingSlot {
    let n = n_c + n_cbar;
    let access_gains: Vec<Vec<f64>> = (0..aps)
        .map(|_| (0..n).map(|_| sample_power_gain(rng, params.alpha2)).collect())
        .collect();
    let backhaul: Vec<(f64, f64)> = (0..aps).map(|_| sample_complex_gain(rng, params.beta2)).collect();
    let ap_decoded = ap_decode(&access_gains, n_c, params);
    let bs_decoded = bs_decode(&ap_decoded, &backhaul, n_c, params);
    FadingSlot {
        n_c,
        n_cbar,
        access_gains,
        backhaul,
        ap_decoded,
        bs_decoded,
    }
}

#[derive(Debug, Clone, Copy, Default)]
struct Tally {
    slots: u64,
    cs: u64,
    ncs: u64,
    cs_active: u64,
    cs_tag: u64,
    ncs_active: u64,
    ncs_tag: u64,
}

fn poisson_count<R: Rng + ?Sized>(rng: &mut R, mean: f64) -> usize {
    if mean <= 0.0 {
        return 0;
    }
    Poisson::new(mean).map(|d| d.sample(rng) as usize).unwrap_or(0)
}

fn run(aps: u32, loads: SlotLoads, params: &FadingParams, n_slots: u64, seed: u64) -> Tally {
    let chunks = n_slots.div_ceil(SLOTS_PER_CHUNK);
    let parts: Vec<Tally> = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let mut t = Tally::default();
            for s in c * SLOTS_PER_CHUNK..((c + 1) * SLOTS_PER_CHUNK).min(n_slots) {
                let mut rng = substream(seed, Purpose::FadingSlot, s);
                let n_c = poisson_count(&mut rng, loads.cs);
                let n_cbar = poisson_count(&mut rng, loads.ncs);
                t.slots += 1;
                t.cs_active += u64::from(n_c > 0);
                t.ncs_active += u64::from(n_cbar > 0);
                if n_c + n_cbar == 0 {
                    continue;
                }
                let slot = simulate_fading_slot(&mut rng, aps, n_c, n_cbar, params);
                match slot.bs_decoded {
                    Some(m) if m < n_c => {
                        t.cs += 1;
                        t.cs_tag += u64::from(m == 0);
                    }
                    Some(m) => {
                        t.ncs += 1;
                        t.ncs_tag += u64::from(m == n_c);
                    }
                    None => {}
                }
            }
            t
        })
        .collect();
    parts.iter().fold(Tally::default(), |a, b| Tally {
        slots: a.slots + b.slots,
        cs: a.cs + b.cs,
        ncs: a.ncs + b.ncs,
        cs_active: a.cs_active + b.cs_active,
        cs_tag: a.cs_tag + b.cs_tag,
        ncs_active: a.ncs_active + b.ncs_active,
        ncs_tag: a.ncs_tag + b.ncs_tag,
    })
}

fn metrics(t: &Tally, seed: u64, share: (f64, f64)) -> SimMetrics {
    let scale = |e: SimEstimate, s: f64| SimEstimate {
        mean: e.mean * s,
        std_error: e.std_error * s,
        ..e
    };
    SimMetrics {
        r_c: scale(SimEstimate::from_bernoulli(t.cs, t.slots, seed), share.0),
        r_cbar: scale(SimEstimate::from_bernoulli(t.ncs, t.slots, seed), share.1),
        gamma_c: SimEstimate::from_bernoulli(t.cs_tag, t.cs_active, seed),
        gamma_cbar: SimEstimate::from_bernoulli(t.ncs_tag, t.ncs_active, seed),
    }
}

/// Estimates throughput and packet success rate of both classes over
/// `n_slots` independent slots. Under TDMA each class is simulated alone on
/// its own slots and its throughput is scaled by its slot share.
pub fn estimate_fading_metrics(cfg: &ScenarioConfig, n_slots: u64, seed: u64) -> Result<SimMetrics> {
    cfg.validate()?;
    if n_slots == 0 {
        return domain("number of slots must be at least 1");
    }
    let params = cfg.fading_params()?;
    match cfg.allocation {
        Allocation::NonOrthogonal => Ok(metrics(
            &run(cfg.aps, cfg.shared_loads(), &params, n_slots, seed),
            seed,
            (1.0, 1.0),
        )),
        Allocation::Tdma { alpha } => {
            let (cs, ncs) = cfg.tdma_loads(alpha);
            let cs_part = run(
                cfg.aps,
                SlotLoads {
                    cs: cs.unwrap_or(0.0),
                    ncs: 0.0,
                },
                &params,
                n_slots,
                seed,
            );
            // an independent seed offset keeps the two partitions uncorrelated
            let ncs_part = run(
                cfg.aps,
                SlotLoads {
                    cs: 0.0,
                    ncs: ncs.unwrap_or(0.0),
                },
                &params,
                n_slots,
                seed ^ 0x5EED,
            );
            let a = metrics(&cs_part, seed, (alpha, 0.0));
            let b = metrics(&ncs_part, seed, (0.0, 1.0 - alpha));
            Ok(SimMetrics {
                r_c: a.r_c,
                r_cbar: b.r_cbar,
                gamma_c: a.gamma_c,
                gamma_cbar: b.gamma_cbar,
            })
        }
    }
}
