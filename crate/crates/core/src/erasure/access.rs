//! Per-slot decoding probabilities at a single access point.

use crate::special::powi;

/// Probability that an AP retrieves a CS packet when `n_c` CS packets are on
/// the air: exactly one of them arrives unerased.
pub fn p_access_cs(n_c: u64, eps1: f64) -> f64 {
    if n_c == 0 {
        return 0.0;
    }
    n_c as f64 * (1.0 - eps1) * powi(eps1, n_c - 1)
}

/// Probability that an AP retrieves an NCS packet: exactly one NCS packet
/// arrives unerased and every CS packet is erased.
pub fn p_access_ncs(n_c: u64, n_cbar: u64, eps1: f64) -> f64 {
    p_access_cs(n_cbar, eps1) * powi(eps1, n_c)
}

/// Access and end-to-end delivery probabilities for one `(n_c, n_cbar)` pair.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AccessProbs {
    pub p_nc: f64,
    pub p_ncbar: f64,
    /// `p_nc` followed by an unerased backhaul hop.
    pub q_nc: f64,
    pub q_ncbar: f64,
}

impl AccessProbs {
    pub fn new(n_c: u64, n_cbar: u64, eps1: f64, eps2: f64) -> Self {
        let p_nc = p_access_cs(n_c, eps1);
        let p_ncbar = p_access_ncs(n_c, n_cbar, eps1);
        AccessProbs {
            p_nc,
            p_ncbar,
            q_nc: p_nc * (1.0 - eps2),
            q_ncbar: p_ncbar * (1.0 - eps2),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cs_examples() {
        assert_eq!(p_access_cs(1, 0.5), 0.5);
        assert_eq!(p_access_cs(0, 0.3), 0.0);
        assert_eq!(p_access_cs(2, 0.5), 0.5);
        // 0^0 = 1: a lone packet on a perfect link always gets through
        assert_eq!(p_access_cs(1, 0.0), 1.0);
        assert_eq!(p_access_cs(2, 0.0), 0.0);
    }

    #[test]
    fn ncs_examples() {
        assert_eq!(p_access_ncs(0, 1, 0.5), 0.5);
        assert_eq!(p_access_ncs(1, 1, 0.5), 0.25);
        assert_eq!(p_access_ncs(5, 2, 1.0), 0.0);
        assert_eq!(p_access_ncs(3, 0, 0.5), 0.0);
    }

    #[test]
    fn composite() {
        let a = AccessProbs::new(1, 1, 0.5, 0.5);
        assert_eq!(a.q_nc, 0.25);
        assert_eq!(a.q_ncbar, 0.125);
        for n_c in 0..12 {
            for n_cbar in 0..12 {
                let a = AccessProbs::new(n_c, n_cbar, 0.3, 0.2);
                assert!(a.p_nc + a.p_ncbar <= 1.0 + 1e-15);
            }
        }
    }
}
