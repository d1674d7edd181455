//! Closed forms of the collision-model metrics, written as alternating
//! binomial expansions over the auxiliary function `H_m`.
//!
//! Each evaluator also returns the sum of absolute values of the terms so
//! the caller can tell when cancellation has eaten the result.

use statrs::function::factorial::ln_factorial;

use super::ErasureModel;
use crate::error::{domain, Result};
use crate::scenario::{SlotLoads, Tolerance};
use crate::special::{aux_h_row, binomial, gamma_k_tolerance, poisson_weights, powi, regularized_gamma_q};

/// Largest tolerated ratio between the term magnitude and the result.
const MAX_CANCELLATION: f64 = 1e6;

/// A closed-form value together with the magnitude of its largest partial
/// cancellation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ClosedForm {
    pub value: f64,
    /// Sum of the absolute values of the expansion terms.
    pub magnitude: f64,
}

impl ClosedForm {
    fn from_terms(terms: impl IntoIterator<Item = f64>) -> Self {
        let (mut value, mut magnitude) = (0.0, 0.0);
        for t in terms {
            value += t;
            magnitude += t.abs();
        }
        ClosedForm { value, magnitude }
    }

    fn scaled(self, s: f64) -> Self {
        ClosedForm {
            value: self.value * s,
            magnitude: self.magnitude * s.abs(),
        }
    }

    /// `false` when the alternating sum lost too many digits to be trusted.
    pub fn is_reliable(&self) -> bool {
        self.value.is_finite()
            && self.magnitude.is_finite()
            && self.magnitude <= MAX_CANCELLATION * self.value.abs().max(f64::MIN_POSITIVE)
    }
}

fn check_eps1(m: &ErasureModel) -> Result<()> {
    if m.eps1 > 0.0 {
        Ok(())
    } else {
        domain("closed forms divide by eps1 and need eps1 > 0")
    }
}

/// `beta / eps1`, the per-packet factor once `eps1^n` is pulled out.
fn ratio(m: &ErasureModel) -> f64 {
    (1.0 - m.eps1) * (1.0 - m.eps2) / m.eps1
}

/// Single-service CS throughput.
pub fn throughput_cs_single(m: &ErasureModel, g_c: f64) -> Result<ClosedForm> {
    check_eps1(m)?;
    let l = u64::from(m.aps);
    let r = ratio(m);
    let mut terms = Vec::with_capacity(m.aps as usize);
    for j in 0..l {
        let h = aux_h_row(j as usize + 1, g_c * powi(m.eps1, j + 1))?[j as usize + 1];
        let sign = if j % 2 == 0 { 1.0 } else { -1.0 };
        terms.push(sign * l as f64 * binomial(l - 1, j) * powi(r, j + 1) * (-g_c).exp() * h);
    }
    Ok(ClosedForm::from_terms(terms))
}

/// Single-service CS packet success rate; `g_c` must be positive.
pub fn psr_cs_single(m: &ErasureModel, g_c: f64) -> Result<ClosedForm> {
    check_eps1(m)?;
    if g_c <= 0.0 {
        return domain("packet success rate needs a positive CS load");
    }
    let l = u64::from(m.aps);
    let beta = (1.0 - m.eps1) * (1.0 - m.eps2);
    let mut terms = Vec::with_capacity(m.aps as usize);
    for j in 0..l {
        let x = g_c * powi(m.eps1, j + 1);
        let inner = if j == 0 {
            x.exp_m1()
        } else {
            aux_h_row(j as usize, x)?[j as usize]
        };
        let sign = if j % 2 == 0 { 1.0 } else { -1.0 };
        terms.push(sign * binomial(l - 1, j) * powi(beta, j) / powi(m.eps1, j + 1) * inner);
    }
    Ok(ClosedForm::from_terms(terms).scaled(l as f64 * beta / g_c.exp_m1()))
}

/// NCS throughput with ideal interference tolerance.
pub fn throughput_ncs_ideal(m: &ErasureModel, loads: SlotLoads) -> Result<ClosedForm> {
    check_eps1(m)?;
    let l = u64::from(m.aps);
    let r = ratio(m);
    let (gc, gb) = (loads.cs, loads.ncs);
    let scale = (-gc - gb).exp();
    let mut terms = Vec::new();
    for i in 0..l {
        let hc = aux_h_row(i as usize, gc * powi(m.eps1, i + 1))?;
        for k in 0..=i {
            let hb = aux_h_row(k as usize + 1, gb * powi(m.eps1, k + 1))?[k as usize + 1];
            let sign = if i % 2 == 0 { 1.0 } else { -1.0 };
            terms.push(sign * binomial(l - 1, i) * binomial(i, k) * powi(r, i + 1) * scale * hc[(i - k) as usize] * hb);
        }
    }
    Ok(ClosedForm::from_terms(terms).scaled(l as f64))
}

/// NCS packet success rate with ideal interference tolerance; the NCS load
/// must be positive.
pub fn psr_ncs_ideal(m: &ErasureModel, loads: SlotLoads) -> Result<ClosedForm> {
    check_eps1(m)?;
    let (gc, gb) = (loads.cs, loads.ncs);
    if gb <= 0.0 {
        return domain("packet success rate needs a positive NCS load");
    }
    let l = u64::from(m.aps);
    let r = ratio(m);
    let mut terms = Vec::new();
    for j in 0..l {
        let hc = aux_h_row(j as usize, gc * powi(m.eps1, j + 1))?;
        let sign = if j % 2 == 0 { 1.0 } else { -1.0 };
        for i in 0..=j {
            // tagged-class factor of order j - i over the zero-truncated law
            let d = j - i;
            let xb = gb * powi(m.eps1, d + 1);
            let b = if d == 0 {
                xb.exp_m1()
            } else {
                aux_h_row(d as usize, xb)?[d as usize]
            };
            terms.push(sign * binomial(l - 1, j) * binomial(j, i) * powi(r, j + 1) * (-gc).exp() * hc[i as usize] * b);
        }
    }
    Ok(ClosedForm::from_terms(terms).scaled(l as f64 / gb.exp_m1()))
}

/// `sum_{n>=1} x^n n^p / n! * gamma_K(n)^e`, where the tolerance factor only
/// acts above `K`.
fn truncated_moment(x: f64, p: u64, k: u32, eps1: f64, e: u64) -> f64 {
    if x == 0.0 {
        return 0.0;
    }
    let ln_x = x.ln();
    let term = |n: u64| (n as f64 * ln_x + p as f64 * (n as f64).ln() - ln_factorial(n)).exp();
    let head: f64 = (1..=u64::from(k)).map(term).sum();
    let mut tail = 0.0;
    // terms decrease once n exceeds about x (1 + 1/n)^p
    let peak = 2.0 * x + 2.0 * p as f64 + 2.0;
    let mut n = u64::from(k) + 1;
    loop {
        let t = term(n) * powi(gamma_k_tolerance(n, eps1, Tolerance::Finite(k)), e);
        tail += t;
        let acc = head + tail;
        if n as f64 > peak && (t <= 1e-18 * acc || t < f64::MIN_POSITIVE) {
            break;
        }
        n += 1;
        if n > 1_000_000 {
            break;
        }
    }
    head + tail
}

/// NCS throughput under a finite tolerance `K`.
pub fn throughput_ncs_finite(m: &ErasureModel, loads: SlotLoads, k: u32) -> Result<ClosedForm> {
    check_eps1(m)?;
    let l = u64::from(m.aps);
    let r = ratio(m);
    let (gc, gb) = (loads.cs, loads.ncs);
    let scale = (-gc - gb).exp();
    let mut terms = Vec::new();
    for i in 0..l {
        let hc = aux_h_row(i as usize, gc * powi(m.eps1, i + 1))?;
        for j in 0..=i {
            let xi = truncated_moment(gb * powi(m.eps1, j + 1), j + 1, k, m.eps1, i - j);
            let sign = if i % 2 == 0 { 1.0 } else { -1.0 };
            terms.push(sign * binomial(l - 1, i) * binomial(i, j) * powi(r, i + 1) * scale * hc[(i - j) as usize] * xi);
        }
    }
    Ok(ClosedForm::from_terms(terms).scaled(l as f64))
}

/// CS throughput under a finite tolerance `K` when `L <= K + 1`, so the BS
/// never sees more than `K` NCS copies.
pub fn throughput_cs_finite_small(m: &ErasureModel, loads: SlotLoads, k: u32) -> Result<ClosedForm> {
    check_eps1(m)?;
    let l = u64::from(m.aps);
    if l > u64::from(k) + 1 {
        return domain(format!("closed form needs L <= K + 1, got L = {l}, K = {k}"));
    }
    let r = ratio(m);
    let (gc, gb) = (loads.cs, loads.ncs);
    let q = regularized_gamma_q(u64::from(k) + 1, gb)?;
    let w = poisson_weights(gb, m.tail_mass)?;
    let mut terms = Vec::with_capacity(m.aps as usize);
    for j in 0..l {
        let h = aux_h_row(j as usize + 1, gc * powi(m.eps1, j + 1))?[j as usize + 1];
        let xi: f64 = w
            .iter()
            .enumerate()
            .skip(k as usize + 1)
            .map(|(n, wn)| wn * powi(gamma_k_tolerance(n as u64, m.eps1, Tolerance::Finite(k)), j + 1))
            .sum();
        let sign = if j % 2 == 0 { 1.0 } else { -1.0 };
        terms.push(sign * l as f64 * binomial(l - 1, j) * powi(r, j + 1) * (-gc).exp() * h * (q + xi));
    }
    Ok(ClosedForm::from_terms(terms))
}

/// Probability that at least one AP retrieves a CS packet.
pub fn benchmark_bound(m: &ErasureModel, g_c: f64) -> Result<ClosedForm> {
    check_eps1(m)?;
    let l = u64::from(m.aps);
    let u = (1.0 - m.eps1) / m.eps1;
    let mut terms = Vec::with_capacity(m.aps as usize);
    for j in 1..=l {
        let h = aux_h_row(j as usize, g_c * powi(m.eps1, j))?[j as usize];
        let sign = if j % 2 == 1 { 1.0 } else { -1.0 };
        terms.push(sign * binomial(l, j) * powi(u, j) * (-g_c).exp() * h);
    }
    Ok(ClosedForm::from_terms(terms))
}
