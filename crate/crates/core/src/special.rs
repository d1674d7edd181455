//! Poisson and binomial probabilities, the regularized gamma function of
//! integer order, and the auxiliary function `H_m(x) = sum_n x^n n^m / n!`
//! that carries every closed-form throughput expression.

use statrs::function::factorial::ln_factorial;
use statrs::function::gamma::gamma_lr;

use crate::error::{domain, Result};
use crate::scenario::Tolerance;

/// Highest order accepted by [`aux_h`]. Orders up to `L` are needed, so this
/// covers every deployment with at most 64 access points.
pub const AUX_H_MAX_ORDER: usize = 64;

/// Default tail mass discarded when an infinite Poisson sum is truncated.
pub const DEFAULT_TAIL_MASS: f64 = 1e-12;

fn check_rate(lambda: f64) -> Result<()> {
    if lambda.is_finite() && lambda >= 0.0 {
        Ok(())
    } else {
        domain(format!("Poisson rate {lambda} must be finite and non-negative"))
    }
}

/// `e^{-lambda} lambda^k / k!`, evaluated in log space.
pub fn poisson_pmf(k: u64, lambda: f64) -> Result<f64> {
    check_rate(lambda)?;
    if lambda == 0.0 {
        return Ok(if k == 0 { 1.0 } else { 0.0 });
    }
    Ok((k as f64 * lambda.ln() - lambda - ln_factorial(k)).exp())
}

/// Smallest `n` such that `P(Poisson(lambda) > n) < delta`.
pub fn poisson_tail_cutoff(lambda: f64, delta: f64) -> Result<u64> {
    check_rate(lambda)?;
    if !(delta > 0.0 && delta < 1.0) {
        return domain(format!("tail mass {delta} must lie in (0, 1)"));
    }
    if lambda == 0.0 {
        return Ok(0);
    }
    // P(N > n) is the regularized lower gamma P(n + 1, lambda); the series
    // branch keeps it accurate far below machine epsilon.
    let mut n = 0u64;
    while gamma_lr((n + 1) as f64, lambda) >= delta {
        n += 1;
    }
    Ok(n)
}

/// Poisson probabilities for `0..=n_max`, where `n_max` is the tail cutoff
/// for `tail_mass`.
pub fn poisson_weights(lambda: f64, tail_mass: f64) -> Result<Vec<f64>> {
    let n_max = poisson_tail_cutoff(lambda, tail_mass)?;
    (0..=n_max).map(|k| poisson_pmf(k, lambda)).collect()
}

/// Zero-truncated ("normalized") Poisson probabilities over `1..=n_max`; the
/// returned vector is indexed by `n`, with a zero weight at index 0.
pub fn normalized_poisson_weights(lambda: f64, tail_mass: f64) -> Result<Vec<f64>> {
    check_rate(lambda)?;
    if lambda == 0.0 {
        return domain("normalized Poisson distribution needs a positive rate");
    }
    let norm = -(-lambda).exp_m1();
    // the tail of the conditional law is the unconditional tail over norm
    let mut w = poisson_weights(lambda, (tail_mass * norm).max(f64::MIN_POSITIVE))?;
    w[0] = 0.0;
    for x in w.iter_mut().skip(1) {
        *x /= norm;
    }
    Ok(w)
}

/// Regularized upper incomplete gamma function of integer first argument,
/// `Q(K+1, x) = P(Poisson(x) <= K)`.
pub fn regularized_gamma_q(k_plus_1: u64, x: f64) -> Result<f64> {
    if k_plus_1 == 0 {
        return domain("regularized gamma order must be positive");
    }
    check_rate(x)?;
    let mut sum = 0.0;
    for n in 0..k_plus_1 {
        let term = poisson_pmf(n, x)?;
        sum += term;
        if n as f64 > x && term < f64::MIN_POSITIVE {
            break;
        }
    }
    Ok(sum.min(1.0))
}

/// Binomial coefficient as a float. Exact (correctly rounded) for `n <= 120`,
/// log-gamma based above.
pub fn binomial(n: u64, k: u64) -> f64 {
    if k > n {
        return 0.0;
    }
    let k = k.min(n - k);
    if n <= 120 {
        let mut c: u128 = 1;
        for i in 0..k {
            // c * (n - i) / (i + 1) stays integral at every step
            c = c * u128::from(n - i) / u128::from(i + 1);
        }
        c as f64
    } else {
        (ln_factorial(n) - ln_factorial(k) - ln_factorial(n - k)).exp().round()
    }
}

/// `C(n, k) p^k (1-p)^(n-k)` with `0^0 = 1`.
pub fn binomial_pmf(n: u64, k: u64, p: f64) -> f64 {
    if k > n {
        return 0.0;
    }
    if n <= 120 {
        binomial(n, k) * powi(p, k) * powi(1.0 - p, n - k)
    } else if p == 0.0 {
        if k == 0 {
            1.0
        } else {
            0.0
        }
    } else if p == 1.0 {
        if k == n {
            1.0
        } else {
            0.0
        }
    } else {
        (ln_factorial(n) - ln_factorial(k) - ln_factorial(n - k) + k as f64 * p.ln() + (n - k) as f64 * (1.0 - p).ln())
            .exp()
    }
}

/// Integer power with `0^0 = 1`.
#[inline]
pub fn powi(x: f64, e: u64) -> f64 {
    match i32::try_from(e) {
        Ok(e) => x.powi(e),
        Err(_) => x.powf(e as f64),
    }
}

/// Probability that at most `K` of `x` independent transmissions survive an
/// erasure channel with erasure probability `eps`.
pub fn gamma_k_tolerance(x: u64, eps: f64, k: Tolerance) -> f64 {
    match k {
        Tolerance::Infinite => 1.0,
        Tolerance::Finite(k) if x <= u64::from(k) => 1.0,
        Tolerance::Finite(k) => (0..=u64::from(k))
            .map(|i| binomial_pmf(x, i, 1.0 - eps))
            .sum::<f64>()
            .min(1.0),
    }
}

/// `H_0(x), ..., H_{m_max}(x)` via the binomial recursion
/// `H_m(x) = x * sum_{l<m} C(m-1, l) H_l(x)`.
pub fn aux_h_row(m_max: usize, x: f64) -> Result<Vec<f64>> {
    if m_max > AUX_H_MAX_ORDER {
        return Err(crate::Error::UnsupportedOrder {
            order: m_max,
            max: AUX_H_MAX_ORDER,
        });
    }
    if !x.is_finite() || x < 0.0 {
        return domain(format!("auxiliary function argument {x} must be finite and >= 0"));
    }
    let mut h = Vec::with_capacity(m_max + 1);
    h.push(x.exp());
    let mut pascal = vec![1.0_f64];
    for _m in 1..=m_max {
        // pascal holds row m-1 of the triangle
        let s: f64 = pascal.iter().zip(&h).map(|(c, hl)| c * hl).sum();
        h.push(x * s);
        let mut next = vec![1.0; pascal.len() + 1];
        for i in 1..pascal.len() {
            next[i] = pascal[i - 1] + pascal[i];
        }
        pascal = next;
    }
    Ok(h)
}

/// `H_m(x) = sum_{n>=0} x^n n^m / n!`.
pub fn aux_h(m: usize, x: f64) -> Result<f64> {
    Ok(aux_h_row(m, x)?[m])
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn pmf_examples() {
        assert_relative_eq!(poisson_pmf(0, 1.0).unwrap(), 0.367_879_441_2, epsilon = 1e-10);
        assert_eq!(poisson_pmf(2, 0.0).unwrap(), 0.0);
        assert_eq!(poisson_pmf(0, 0.0).unwrap(), 1.0);
        // e^{-2.5} 2.5^3 / 3!
        assert!((poisson_pmf(3, 2.5).unwrap() - 0.213_763_017_2).abs() < 1e-9);
        assert!(poisson_pmf(1, -1.0).is_err());
        assert!(poisson_pmf(1, f64::NAN).is_err());
        // no overflow at large k
        assert!(poisson_pmf(5000, 4000.0).unwrap() > 0.0);
    }

    #[test]
    fn cutoff_examples() {
        assert_eq!(poisson_tail_cutoff(0.0, 1e-12).unwrap(), 0);
        assert_eq!(poisson_tail_cutoff(1.0, 0.5).unwrap(), 1);
        assert!(poisson_tail_cutoff(1.0, 0.0).is_err());
        assert!(poisson_tail_cutoff(1.0, 1.0).is_err());
    }

    #[test]
    fn regularized_gamma_examples() {
        assert_relative_eq!(regularized_gamma_q(1, 1.0).unwrap(), (-1.0f64).exp(), epsilon = 1e-15);
        assert_eq!(regularized_gamma_q(5, 0.0).unwrap(), 1.0);
        assert!((regularized_gamma_q(2, 1.0).unwrap() - 0.735_758_9).abs() < 1e-7);
        assert!(regularized_gamma_q(0, 1.0).is_err());
    }

    #[test]
    fn regularized_gamma_matches_statrs() {
        use statrs::function::gamma::gamma_ur;
        for &x in &[0.1, 1.0, 2.5, 7.0, 15.0] {
            for k in 0..20u64 {
                let ours = regularized_gamma_q(k + 1, x).unwrap();
                let theirs = gamma_ur((k + 1) as f64, x);
                assert!((ours - theirs).abs() < 1e-12, "k={k} x={x}: {ours} vs {theirs}");
            }
        }
    }

    #[test]
    fn aux_h_examples() {
        assert_eq!(aux_h(0, 0.0).unwrap(), 1.0);
        assert!((aux_h(1, 1.0).unwrap() - std::f64::consts::E).abs() < 1e-12);
        assert!((aux_h(2, 1.0).unwrap() - 2.0 * std::f64::consts::E).abs() < 1e-12);
        assert_eq!(
            aux_h(65, 1.0),
            Err(crate::Error::UnsupportedOrder { order: 65, max: 64 })
        );
        assert!(aux_h(64, 1.0).unwrap().is_finite());
    }

    #[test]
    fn gamma_k_examples() {
        assert_eq!(gamma_k_tolerance(2, 0.5, Tolerance::Finite(3)), 1.0);
        assert_eq!(gamma_k_tolerance(2, 0.5, Tolerance::Finite(0)), 0.25);
        assert_eq!(gamma_k_tolerance(1, 0.0, Tolerance::Finite(0)), 0.0);
        assert_eq!(gamma_k_tolerance(40, 0.3, Tolerance::Infinite), 1.0);
    }

    #[test]
    fn binomial_exact_small() {
        assert_eq!(binomial(5, 2), 10.0);
        assert_eq!(binomial(63, 31), 916_312_070_471_295_267.0);
        assert_eq!(binomial(3, 4), 0.0);
        assert_eq!(binomial(0, 0), 1.0);
        let big = binomial(200, 3);
        assert_eq!(big, 1_313_400.0);
    }

    #[test]
    fn normalized_weights_sum_to_one() {
        let w = normalized_poisson_weights(0.7, 1e-14).unwrap();
        assert_eq!(w[0], 0.0);
        assert!((w.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        assert!(normalized_poisson_weights(0.0, 1e-12).is_err());
    }
}
