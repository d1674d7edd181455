//! Direct evaluation of the collision-model metrics as truncated Poisson
//! expectations of the per-slot delivery probabilities.
//!
//! These sums are the reference route: every closed form in
//! [`super::closed`] is checked against them.

use super::access::{p_access_cs, AccessProbs};
use super::ErasureModel;
use crate::error::Result;
use crate::scenario::{SlotLoads, Tolerance};
use crate::special::{binomial, gamma_k_tolerance, normalized_poisson_weights, poisson_weights, powi};

fn weights(m: &ErasureModel, lambda: f64) -> Result<Vec<f64>> {
    poisson_weights(lambda, m.tail_mass)
}

fn tagged_weights(m: &ErasureModel, lambda: f64) -> Result<Vec<f64>> {
    normalized_poisson_weights(lambda, m.tail_mass)
}

/// `L q (1 - q)^(L-1)`: exactly one of `L` independent relays delivers.
fn exactly_one(aps: u32, q: f64) -> f64 {
    f64::from(aps) * q * powi(1.0 - q, u64::from(aps) - 1)
}

/// Single-service CS throughput, `E[L q_n (1 - q_n)^(L-1)]` over `N_c`.
pub fn throughput_cs_single(m: &ErasureModel, g_c: f64) -> Result<f64> {
    let w = weights(m, g_c)?;
    Ok(w.iter()
        .enumerate()
        .map(|(n, wn)| wn * exactly_one(m.aps, p_access_cs(n as u64, m.eps1) * (1.0 - m.eps2)))
        .sum())
}

/// Single-service CS packet success rate over the zero-truncated Poisson
/// count of the tagged user's slot.
pub fn psr_cs_single(m: &ErasureModel, g_c: f64) -> Result<f64> {
    let w = tagged_weights(m, g_c)?;
    let l = u64::from(m.aps);
    Ok(w.iter()
        .enumerate()
        .skip(1)
        .map(|(n, wn)| {
            let n = n as u64;
            let p_u = (1.0 - m.eps1) * powi(m.eps1, n - 1);
            let q_n = p_access_cs(n, m.eps1) * (1.0 - m.eps2);
            wn * l as f64 * p_u * (1.0 - m.eps2) * powi(1.0 - q_n, l - 1)
        })
        .sum())
}

/// NCS throughput: one relay delivers an NCS packet and no other relay
/// delivers anything. With a finite tolerance an AP only retrieves a CS
/// packet when at most `K` NCS packets arrive unerased.
pub fn throughput_ncs(m: &ErasureModel, loads: SlotLoads, k: Tolerance) -> Result<f64> {
    let wc = weights(m, loads.cs)?;
    let wb = weights(m, loads.ncs)?;
    let l = u64::from(m.aps);
    let mut total = 0.0;
    for (nb, wnb) in wb.iter().enumerate() {
        let nb = nb as u64;
        let gk = gamma_k_tolerance(nb, m.eps1, k);
        for (nc, wnc) in wc.iter().enumerate() {
            let a = AccessProbs::new(nc as u64, nb, m.eps1, m.eps2);
            let q_c = a.q_nc * gk;
            total += wnb * wnc * l as f64 * a.q_ncbar * powi(1.0 - q_c - a.q_ncbar, l - 1);
        }
    }
    Ok(total)
}

/// CS throughput under tolerance `K`: exactly one relay delivers a CS
/// packet and at most `K` relays deliver NCS packets.
pub fn throughput_cs(m: &ErasureModel, loads: SlotLoads, k: Tolerance) -> Result<f64> {
    let wc = weights(m, loads.cs)?;
    let wb = weights(m, loads.ncs)?;
    let l = u64::from(m.aps);
    let max_ncs = match k {
        Tolerance::Finite(k) => u64::from(k).min(l - 1),
        Tolerance::Infinite => l - 1,
    };
    // multinomial coefficients L! / (1! j! (L-1-j)!) = L C(L-1, j)
    let coef: Vec<f64> = (0..=max_ncs).map(|j| l as f64 * binomial(l - 1, j)).collect();
    let mut total = 0.0;
    for (nb, wnb) in wb.iter().enumerate() {
        let nb = nb as u64;
        let gk = gamma_k_tolerance(nb, m.eps1, k);
        for (nc, wnc) in wc.iter().enumerate() {
            let a = AccessProbs::new(nc as u64, nb, m.eps1, m.eps2);
            let q_c = a.q_nc * gk;
            if q_c == 0.0 {
                continue;
            }
            let rest = 1.0 - q_c - a.q_ncbar;
            let s: f64 = coef
                .iter()
                .enumerate()
                .map(|(j, c)| c * powi(a.q_ncbar, j as u64) * powi(rest, l - 1 - j as u64))
                .sum();
            total += wnb * wnc * q_c * s;
        }
    }
    Ok(total)
}

/// CS packet success rate under tolerance `K`. The tagged packet is retrieved
/// at one relay, no other relay delivers a CS packet and at most `K` others
/// deliver NCS packets.
pub fn psr_cs(m: &ErasureModel, loads: SlotLoads, k: Tolerance) -> Result<f64> {
    psr_cs_impl(m, loads, k, false)
}

/// CS packet success rate with the interference term written as an
/// independent binomial factor,
/// `(1 - q_n')^(L-1) * sum_{i<=K} C(L-1, i) p^i (1 - p)^(L-1-i)`.
/// Coincides with [`psr_cs`] when `L <= K + 1`.
pub fn psr_cs_factorized(m: &ErasureModel, loads: SlotLoads, k: Tolerance) -> Result<f64> {
    psr_cs_impl(m, loads, k, true)
}

fn psr_cs_impl(m: &ErasureModel, loads: SlotLoads, k: Tolerance, factorized: bool) -> Result<f64> {
    let wc = tagged_weights(m, loads.cs)?;
    let wb = weights(m, loads.ncs)?;
    let l = u64::from(m.aps);
    let max_ncs = match k {
        Tolerance::Finite(k) => u64::from(k).min(l - 1),
        Tolerance::Infinite => l - 1,
    };
    let mut total = 0.0;
    for (nb, wnb) in wb.iter().enumerate() {
        let nb = nb as u64;
        let gk = gamma_k_tolerance(nb, m.eps1, k);
        for (nc, wnc) in wc.iter().enumerate().skip(1) {
            let nc = nc as u64;
            let p_u = (1.0 - m.eps1) * powi(m.eps1, nc - 1) * gk;
            let a = AccessProbs::new(nc, nb, m.eps1, m.eps2);
            let q_c = a.q_nc * gk;
            let q_b = a.q_ncbar;
            let others: f64 = if factorized {
                powi(1.0 - q_c, l - 1)
                    * (0..=max_ncs)
                        .map(|i| binomial(l - 1, i) * powi(q_b, i) * powi(1.0 - q_b, l - 1 - i))
                        .sum::<f64>()
            } else {
                (0..=max_ncs)
                    .map(|i| binomial(l - 1, i) * powi(q_b, i) * powi(1.0 - q_c - q_b, l - 1 - i))
                    .sum()
            };
            total += wnb * wnc * l as f64 * p_u * (1.0 - m.eps2) * others;
        }
    }
    Ok(total)
}

/// NCS packet success rate. A relay delivers the tagged packet when it is the
/// only unerased NCS arrival and every CS packet is erased; every other relay
/// must stay silent. `cs_tolerance` is the tolerance applied to the CS
/// retrieval probability of those other relays.
pub fn psr_ncs(m: &ErasureModel, loads: SlotLoads, cs_tolerance: ToleranceIndex) -> Result<f64> {
    let wc = weights(m, loads.cs)?;
    let wb = tagged_weights(m, loads.ncs)?;
    let l = u64::from(m.aps);
    let mut total = 0.0;
    for (nb, wnb) in wb.iter().enumerate().skip(1) {
        let nb = nb as u64;
        let gk = cs_tolerance.gamma(nb, m.eps1);
        for (nc, wnc) in wc.iter().enumerate() {
            let nc = nc as u64;
            let p_u = (1.0 - m.eps1) * powi(m.eps1, nb - 1) * powi(m.eps1, nc);
            let a = AccessProbs::new(nc, nb, m.eps1, m.eps2);
            let q = a.q_nc * gk + a.q_ncbar;
            total += wnb * wnc * l as f64 * p_u * (1.0 - m.eps2) * powi(1.0 - q, l - 1);
        }
    }
    Ok(total)
}

/// Tolerance used inside an NCS success-rate expectation, possibly shifted
/// by one below the configured `K`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ToleranceIndex {
    Infinite,
    /// `gamma_j` with `j` possibly negative; `gamma_{-1}` is identically 0.
    Finite(i64),
}

impl ToleranceIndex {
    fn gamma(self, x: u64, eps: f64) -> f64 {
        match self {
            ToleranceIndex::Infinite => 1.0,
            ToleranceIndex::Finite(j) if j < 0 => 0.0,
            ToleranceIndex::Finite(j) => {
                let j = u32::try_from(j).unwrap_or(u32::MAX);
                gamma_k_tolerance(x, eps, Tolerance::Finite(j))
            }
        }
    }
}

impl From<Tolerance> for ToleranceIndex {
    fn from(k: Tolerance) -> Self {
        match k {
            Tolerance::Infinite => ToleranceIndex::Infinite,
            Tolerance::Finite(k) => ToleranceIndex::Finite(i64::from(k)),
        }
    }
}

/// Probability that at least one relay retrieves a CS packet in a slot.
pub fn benchmark_bound(m: &ErasureModel, g_c: f64) -> Result<f64> {
    let w = weights(m, g_c)?;
    let l = u64::from(m.aps);
    Ok(w.iter()
        .enumerate()
        .map(|(n, wn)| wn * (1.0 - powi(1.0 - p_access_cs(n as u64, m.eps1), l)))
        .sum())
}
