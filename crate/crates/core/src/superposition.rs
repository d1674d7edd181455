//! Superposition receiver over erasure channels.
//!
//! Given the slot counts `(n_c, n_cbar)`, each AP independently ends up
//! silent or holding one specific message, so the vector of copy counts per
//! message is multinomial. The base station combines copies of the same
//! message and only fails on distinct-message interference. Metrics are
//! Poisson averages of the conditional decode probabilities over that
//! multinomial, taken either by enumerating every allocation or by sampling.

use rayon::prelude::*;

use crate::erasure::{p_access_cs, p_access_ncs};
use crate::error::{check_probability, domain, Error, Result};
use crate::metrics::ServiceMetrics;
use crate::rng::{substream, Purpose};
use crate::sampling::multinomial_sample;
use crate::scenario::{Allocation, Receiver, ScenarioConfig, SlotLoads, Tolerance};
use crate::special::{gamma_k_tolerance, normalized_poisson_weights, poisson_weights, powi, DEFAULT_TAIL_MASS};

/// Default cap on the number of allocations enumerated for one `(n_c, n_cbar)` pair.
pub const DEFAULT_ENUMERATION_LIMIT: u128 = 200_000;

/// Copy counts at the APs in one slot: entry 0 counts silent APs, entries
/// `1..=n_c` the APs holding each CS message and the remaining entries the
/// APs holding each NCS message.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ApAllocation {
    pub m_counts: Vec<u32>,
}

impl ApAllocation {
    pub fn new(m_counts: Vec<u32>) -> Result<Self> {
        if m_counts.is_empty() {
            return domain("allocation needs at least the silent cell");
        }
        Ok(ApAllocation { m_counts })
    }

    /// Number of APs.
    pub fn aps(&self) -> u64 {
        self.m_counts.iter().map(|&m| u64::from(m)).sum()
    }

    fn check(&self, n_c: u32, n_cbar: u32) -> Result<()> {
        let cells = 1 + n_c as usize + n_cbar as usize;
        if self.m_counts.len() != cells {
            return domain(format!(
                "allocation has {} cells, expected {cells} for n_c = {n_c}, n_cbar = {n_cbar}",
                self.m_counts.len()
            ));
        }
        Ok(())
    }

    fn cs(&self, n_c: u32) -> &[u32] {
        &self.m_counts[1..=n_c as usize]
    }

    fn ncs(&self, n_c: u32) -> &[u32] {
        &self.m_counts[1 + n_c as usize..]
    }
}

/// Cell probabilities of the allocation multinomial. An AP holds a given CS
/// message with probability `p_nc gamma_K(n_cbar) / n_c` and a given NCS
/// message with probability `p_ncbar / n_cbar`.
pub fn ap_allocation_probs(n_c: u32, n_cbar: u32, eps1: f64, k: Tolerance) -> Result<Vec<f64>> {
    check_probability("eps1", eps1)?;
    let (nc, nb) = (u64::from(n_c), u64::from(n_cbar));
    let p_c = p_access_cs(nc, eps1) * gamma_k_tolerance(nb, eps1, k);
    let p_b = p_access_ncs(nc, nb, eps1);
    let mut probs = Vec::with_capacity(1 + n_c as usize + n_cbar as usize);
    probs.push((1.0 - p_c - p_b).max(0.0));
    probs.extend(std::iter::repeat_n(p_c / nc.max(1) as f64, n_c as usize));
    probs.extend(std::iter::repeat_n(p_b / nb.max(1) as f64, n_cbar as usize));
    Ok(probs)
}

/// `sum_m (1 - e^{M_m}) prod_{m' != m} e^{M_m'}`: exactly one of the
/// messages gets at least one copy through.
fn exactly_one_survives(counts: &[u32], eps2: f64) -> f64 {
    let mut all_lost = 1.0;
    let mut one = 0.0;
    for &m in counts {
        let lost = powi(eps2, u64::from(m));
        one = one * lost + (1.0 - lost) * all_lost;
        all_lost *= lost;
    }
    one
}

fn copies(counts: &[u32]) -> u64 {
    counts.iter().map(|&m| u64::from(m)).sum()
}

/// Probability that the BS decodes a CS message: one CS message gets
/// through and at most `K` NCS copies survive the backhaul.
pub fn bs_decode_prob_cs(alloc: &ApAllocation, n_c: u32, n_cbar: u32, eps2: f64, k: Tolerance) -> Result<f64> {
    alloc.check(n_c, n_cbar)?;
    check_probability("eps2", eps2)?;
    Ok(gamma_k_tolerance(copies(alloc.ncs(n_c)), eps2, k) * exactly_one_survives(alloc.cs(n_c), eps2))
}

/// Probability that the BS decodes an NCS message: every CS copy is erased
/// and exactly one NCS message gets through.
pub fn bs_decode_prob_ncs(alloc: &ApAllocation, n_c: u32, n_cbar: u32, eps2: f64) -> Result<f64> {
    alloc.check(n_c, n_cbar)?;
    check_probability("eps2", eps2)?;
    Ok(powi(eps2, copies(alloc.cs(n_c))) * exactly_one_survives(alloc.ncs(n_c), eps2))
}

/// Probability that the BS decodes the first message of a class.
fn tagged_decode_prob(alloc: &ApAllocation, n_c: u32, eps2: f64, k: Tolerance, class: Class) -> f64 {
    let (cs, ncs) = (alloc.cs(n_c), alloc.ncs(n_c));
    match class {
        Class::Cs => {
            gamma_k_tolerance(copies(ncs), eps2, k)
                * (1.0 - powi(eps2, u64::from(cs[0])))
                * powi(eps2, copies(&cs[1..]))
        }
        Class::Ncs => powi(eps2, copies(cs)) * (1.0 - powi(eps2, u64::from(ncs[0]))) * powi(eps2, copies(&ncs[1..])),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Class {
    Cs,
    Ncs,
}

/// How the expectation over allocations is taken.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Estimator {
    /// Exhaustive enumeration; fails when one `(n_c, n_cbar)` pair needs more
    /// than `limit` allocations.
    ExactEnum { limit: u128 },
    /// Sampled allocations per `(n_c, n_cbar)` pair, with independent streams
    /// derived from `seed`.
    ConditionedMc { samples: u64, seed: u64 },
}

impl Default for Estimator {
    fn default() -> Self {
        Estimator::ExactEnum {
            limit: DEFAULT_ENUMERATION_LIMIT,
        }
    }
}

/// Metrics with the Monte Carlo standard error of each entry; the errors are
/// zero for exact enumeration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SuperpositionEstimate {
    pub metrics: ServiceMetrics,
    pub std_error: ServiceMetrics,
}

/// Number of ways to place `aps` APs in `cells` cells.
pub fn allocation_count(aps: u32, cells: usize) -> u128 {
    let (n, k) = (u64::from(aps) + cells as u64 - 1, cells as u64 - 1);
    let k = k.min(n - k);
    let mut c: u128 = 1;
    for i in 0..k {
        c = c * u128::from(n - i) / u128::from(i + 1);
        if c > u128::from(u64::MAX) {
            return u128::MAX;
        }
    }
    c
}

/// The three conditional decode probabilities averaged over allocations.
#[derive(Debug, Clone, Copy, Default)]
struct Conditional {
    /// Total probability covered; 1 up to rounding for exact enumeration.
    weight: f64,
    cs: f64,
    ncs: f64,
    tagged: f64,
}

/// Walks every allocation, carrying the multinomial weight and the running
/// products needed by the decode probabilities.
struct Enumerator<'a> {
    probs: &'a [f64],
    n_c: usize,
    eps2: f64,
    k: Tolerance,
    tag: Option<Class>,
    counts: Vec<u32>,
    ln_l_fact: f64,
    acc: Conditional,
}

impl Enumerator<'_> {
    fn walk(&mut self, cell: usize, left: u32, weight: f64) {
        if weight == 0.0 {
            return;
        }
        if cell + 1 == self.probs.len() {
            let x = left;
            let w = weight * powi(self.probs[cell], u64::from(x)) / factorial(x);
            if w == 0.0 {
                return;
            }
            self.counts[cell] = x;
            let w = w * self.ln_l_fact.exp();
            let alloc = ApAllocation {
                m_counts: std::mem::take(&mut self.counts),
            };
            let n_c = self.n_c as u32;
            let n_cbar = (alloc.m_counts.len() - 1 - self.n_c) as u32;
            // the allocation is consistent by construction
            self.acc.weight += w;
            self.acc.cs += w * bs_decode_prob_cs(&alloc, n_c, n_cbar, self.eps2, self.k).unwrap_or(0.0);
            self.acc.ncs += w * bs_decode_prob_ncs(&alloc, n_c, n_cbar, self.eps2).unwrap_or(0.0);
            if let Some(class) = self.tag {
                self.acc.tagged += w * tagged_decode_prob(&alloc, n_c, self.eps2, self.k, class);
            }
            self.counts = alloc.m_counts;
            return;
        }
        let p = self.probs[cell];
        let mut pw = 1.0;
        for x in 0..=left {
            self.counts[cell] = x;
            self.walk(cell + 1, left - x, weight * pw / factorial(x));
            pw *= p;
            if pw == 0.0 {
                break;
            }
        }
        self.counts[cell] = 0;
    }
}

fn factorial(x: u32) -> f64 {
    (1..=x).map(f64::from).product()
}

/// Parameters shared by every `(n_c, n_cbar)` pair of one evaluation.
#[derive(Debug, Clone, Copy)]
struct PairContext {
    aps: u32,
    eps1: f64,
    eps2: f64,
    k: Tolerance,
    estimator: Estimator,
}

/// Conditional expectations for one pair, with the MC variance of each mean.
fn pair_expectation(
    ctx: &PairContext,
    n_c: u32,
    n_cbar: u32,
    tag: Option<Class>,
    index: u64,
) -> Result<(Conditional, Conditional)> {
    let probs = ap_allocation_probs(n_c, n_cbar, ctx.eps1, ctx.k)?;
    match ctx.estimator {
        Estimator::ExactEnum { limit } => {
            let needed = allocation_count(ctx.aps, probs.len());
            if needed > limit {
                return Err(Error::Capacity {
                    what: "allocation enumeration",
                    needed,
                    limit,
                });
            }
            let mut e = Enumerator {
                probs: &probs,
                n_c: n_c as usize,
                eps2: ctx.eps2,
                k: ctx.k,
                tag,
                counts: vec![0; probs.len()],
                ln_l_fact: factorial(ctx.aps).ln(),
                acc: Conditional::default(),
            };
            e.walk(0, ctx.aps, 1.0);
            Ok((e.acc, Conditional::default()))
        }
        Estimator::ConditionedMc { samples, seed } => {
            if samples == 0 {
                return domain("conditioned Monte Carlo needs at least one sample");
            }
            let mut rng = substream(seed, Purpose::Allocation, index);
            let (mut sum, mut sq) = ([0.0f64; 3], [0.0f64; 3]);
            for _ in 0..samples {
                let counts = multinomial_sample(&mut rng, u64::from(ctx.aps), &probs)?;
                let alloc = ApAllocation {
                    m_counts: counts.into_iter().map(|c| c as u32).collect(),
                };
                let v = [
                    bs_decode_prob_cs(&alloc, n_c, n_cbar, ctx.eps2, ctx.k)?,
                    bs_decode_prob_ncs(&alloc, n_c, n_cbar, ctx.eps2)?,
                    tag.map_or(0.0, |c| tagged_decode_prob(&alloc, n_c, ctx.eps2, ctx.k, c)),
                ];
                for i in 0..3 {
                    sum[i] += v[i];
                    sq[i] += v[i] * v[i];
                }
            }
            let n = samples as f64;
            let mean = sum.map(|s| s / n);
            // variance of the mean
            let var: Vec<f64> = (0..3)
                .map(|i| {
                    if samples > 1 {
                        ((sq[i] - n * mean[i] * mean[i]) / (n - 1.0)).max(0.0) / n
                    } else {
                        0.0
                    }
                })
                .collect();
            Ok((
                Conditional {
                    weight: 1.0,
                    cs: mean[0],
                    ncs: mean[1],
                    tagged: mean[2],
                },
                Conditional {
                    weight: 0.0,
                    cs: var[0],
                    ncs: var[1],
                    tagged: var[2],
                },
            ))
        }
    }
}

/// `sum_pairs w * E[.|pair]` with the propagated MC variance.
fn average(ctx: &PairContext, wc: &[f64], wb: &[f64], tag: Option<Class>) -> Result<(Conditional, Conditional)> {
    let pairs: Vec<(u32, u32, f64)> = wc
        .iter()
        .enumerate()
        .flat_map(|(nc, &a)| wb.iter().enumerate().map(move |(nb, &b)| (nc as u32, nb as u32, a * b)))
        .filter(|&(_, _, w)| w > 0.0)
        .collect();
    let parts: Vec<Result<(f64, Conditional, Conditional)>> = pairs
        .par_iter()
        .map(|&(nc, nb, w)| {
            let index = (u64::from(nc) << 32) | u64::from(nb);
            let (mean, var) = pair_expectation(ctx, nc, nb, tag, index)?;
            Ok((w, mean, var))
        })
        .collect();
    let (mut mean, mut var) = (Conditional::default(), Conditional::default());
    for part in parts {
        let (w, m, v) = part?;
        mean.cs += w * m.cs;
        mean.ncs += w * m.ncs;
        mean.tagged += w * m.tagged;
        var.cs += w * w * v.cs;
        var.ncs += w * w * v.ncs;
        var.tagged += w * w * v.tagged;
    }
    Ok((mean, var))
}

/// Both class metrics for loads sharing every slot.
pub fn class_metrics(
    aps: u32,
    eps1: f64,
    eps2: f64,
    k: Tolerance,
    loads: SlotLoads,
    estimator: Estimator,
) -> Result<SuperpositionEstimate> {
    if aps == 0 {
        return domain("number of access points must be at least 1");
    }
    check_probability("eps1", eps1)?;
    check_probability("eps2", eps2)?;
    let ctx = PairContext {
        aps,
        eps1,
        eps2,
        k,
        estimator,
    };
    let tail = DEFAULT_TAIL_MASS;
    let wc = poisson_weights(loads.cs, tail)?;
    let wb = poisson_weights(loads.ncs, tail)?;
    let (thr, thr_var) = average(&ctx, &wc, &wb, None)?;
    let mut metrics = ServiceMetrics {
        r_c: thr.cs,
        r_cbar: thr.ncs,
        ..ServiceMetrics::ZERO
    };
    let mut std_error = ServiceMetrics {
        r_c: thr_var.cs.sqrt(),
        r_cbar: thr_var.ncs.sqrt(),
        ..ServiceMetrics::ZERO
    };
    if loads.cs > 0.0 {
        let (m, v) = average(&ctx, &normalized_poisson_weights(loads.cs, tail)?, &wb, Some(Class::Cs))?;
        metrics.gamma_c = m.tagged;
        std_error.gamma_c = v.tagged.sqrt();
    }
    if loads.ncs > 0.0 {
        let (m, v) = average(
            &ctx,
            &wc,
            &normalized_poisson_weights(loads.ncs, tail)?,
            Some(Class::Ncs),
        )?;
        metrics.gamma_cbar = m.tagged;
        std_error.gamma_cbar = v.tagged.sqrt();
    }
    Ok(SuperpositionEstimate { metrics, std_error })
}

/// Evaluates a superposition-receiver scenario over erasure channels. TDMA
/// is handled as in [`crate::erasure::evaluate_erasure`].
pub fn evaluate_superposition(cfg: &ScenarioConfig, estimator: Estimator) -> Result<SuperpositionEstimate> {
    cfg.validate()?;
    if cfg.receiver != Receiver::Superposition {
        return domain("collision receivers are evaluated by the erasure module");
    }
    let e = cfg.erasure_params()?;
    let eval = |loads| class_metrics(cfg.aps, e.eps1, e.eps2, cfg.tolerance, loads, estimator);
    match cfg.allocation {
        Allocation::NonOrthogonal => eval(cfg.shared_loads()),
        Allocation::Tdma { alpha } => {
            let (cs, ncs) = cfg.tdma_loads(alpha);
            let alone = |load: Option<f64>| -> Result<(f64, f64, f64, f64)> {
                match load {
                    Some(g) if g > 0.0 => {
                        let r = eval(SlotLoads { cs: g, ncs: 0.0 })?;
                        Ok((r.metrics.r_c, r.metrics.gamma_c, r.std_error.r_c, r.std_error.gamma_c))
                    }
                    _ => Ok((0.0, 0.0, 0.0, 0.0)),
                }
            };
            let (r_c, gamma_c, se_r_c, se_gamma_c) = alone(cs)?;
            let (r_b, gamma_b, se_r_b, se_gamma_b) = alone(ncs)?;
            Ok(SuperpositionEstimate {
                metrics: ServiceMetrics {
                    r_c: alpha * r_c,
                    r_cbar: (1.0 - alpha) * r_b,
                    gamma_c,
                    gamma_cbar: gamma_b,
                },
                std_error: ServiceMetrics {
                    r_c: alpha * se_r_c,
                    r_cbar: (1.0 - alpha) * se_r_b,
                    gamma_c: se_gamma_c,
                    gamma_cbar: se_gamma_b,
                },
            })
        }
    }
}
