//! Random draws shared by the simulators.

use rand::Rng;
use rand_distr::{Binomial, Distribution};

use crate::error::{domain, Result};

/// Draws cell counts of a multinomial distribution by sequential conditional
/// binomials.
pub fn multinomial_sample<R: Rng + ?Sized>(rng: &mut R, trials: u64, probs: &[f64]) -> Result<Vec<u64>> {
    if probs.is_empty() {
        return domain("multinomial needs at least one cell");
    }
    if probs.iter().any(|p| !p.is_finite() || *p < 0.0) {
        return domain("multinomial probabilities must be finite and non-negative");
    }
    let total: f64 = probs.iter().sum();
    if (total - 1.0).abs() > 1e-12 {
        return domain(format!("multinomial probabilities sum to {total}, not 1"));
    }
    let mut counts = vec![0u64; probs.len()];
    let mut left = trials;
    let mut mass = 1.0;
    let last = probs.len() - 1;
    for (i, &p) in probs.iter().enumerate() {
        if left == 0 {
            break;
        }
        if i == last {
            counts[i] = left;
            break;
        }
        let q = if mass > 0.0 { (p / mass).clamp(0.0, 1.0) } else { 0.0 };
        let c = if q >= 1.0 {
            left
        } else if q <= 0.0 {
            0
        } else {
            Binomial::new(left, q).expect("valid binomial").sample(rng)
        };
        counts[i] = c;
        left -= c;
        mass -= p;
    }
    Ok(counts)
}

/// Bernoulli draw with success probability `p`.
#[inline]
pub fn coin<R: Rng + ?Sized>(rng: &mut R, p: f64) -> bool {
    rng.random::<f64>() < p
}
