//! Brute-force reference model shared by the integration tests.
//!
//! For fixed device counts it enumerates every access erasure pattern at one
//! AP, then every joint AP outcome and every backhaul erasure pattern, and
//! applies the receiver rules literally. Nothing here calls the library's
//! evaluators.

#![allow(dead_code)]

/// What an AP forwards: nothing, or a message index (`0..n_c` CS, the rest NCS).
pub type ApOut = Option<usize>;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Rule {
    Collision,
    Superposition,
}

/// `None` for infinite tolerance.
pub type Tol = Option<u32>;

fn admits(k: Tol, x: usize) -> bool {
    k.is_none_or(|k| x <= k as usize)
}

/// Distribution of one AP's output given the counts.
pub fn ap_distribution(n_c: usize, n_b: usize, eps1: f64, k: Tol) -> Vec<(ApOut, f64)> {
    let n = n_c + n_b;
    let mut out: Vec<(ApOut, f64)> = Vec::new();
    for mask in 0u32..(1 << n) {
        // bit set = packet arrives unerased
        let mut p = 1.0;
        for i in 0..n {
            p *= if mask >> i & 1 == 1 { 1.0 - eps1 } else { eps1 };
        }
        if p == 0.0 {
            continue;
        }
        let cs: Vec<usize> = (0..n_c).filter(|&i| mask >> i & 1 == 1).collect();
        let ncs: Vec<usize> = (n_c..n).filter(|&i| mask >> i & 1 == 1).collect();
        let decoded = if cs.len() == 1 && admits(k, ncs.len()) {
            Some(cs[0])
        } else if cs.is_empty() && ncs.len() == 1 {
            Some(ncs[0])
        } else {
            None
        };
        match out.iter_mut().find(|(d, _)| *d == decoded) {
            Some(e) => e.1 += p,
            None => out.push((decoded, p)),
        }
    }
    out
}

/// BS decision for the messages that survived the backhaul.
pub fn bs_rule(arrivals: &[usize], n_c: usize, k: Tol, rule: Rule) -> Option<usize> {
    let cs: Vec<usize> = arrivals.iter().copied().filter(|&m| m < n_c).collect();
    let ncs: Vec<usize> = arrivals.iter().copied().filter(|&m| m >= n_c).collect();
    let single = |v: &[usize]| -> Option<usize> {
        match rule {
            Rule::Collision => (v.len() == 1).then(|| v[0]),
            Rule::Superposition => (!v.is_empty() && v.iter().all(|&m| m == v[0])).then(|| v[0]),
        }
    };
    if let Some(m) = single(&cs) {
        if admits(k, ncs.len()) {
            return Some(m);
        }
    }
    if cs.is_empty() {
        return single(&ncs);
    }
    None
}

/// Per-slot probabilities for fixed counts: CS delivered, NCS delivered,
/// message 0 delivered, message `n_c` delivered.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct SlotProbs {
    pub cs: f64,
    pub ncs: f64,
    pub first_cs: f64,
    pub first_ncs: f64,
}

pub fn slot_probs(l: usize, n_c: usize, n_b: usize, eps1: f64, eps2: f64, k: Tol, rule: Rule) -> SlotProbs {
    let dist = ap_distribution(n_c, n_b, eps1, k);
    let mut acc = SlotProbs::default();
    let mut idx = vec![0usize; l];
    loop {
        let mut p_ap = 1.0;
        for &i in &idx {
            p_ap *= dist[i].1;
        }
        for bh in 0u32..(1 << l) {
            let mut p = p_ap;
            let mut arrivals = Vec::new();
            for (a, &i) in idx.iter().enumerate() {
                match dist[i].0 {
                    Some(m) if bh >> a & 1 == 1 => {
                        p *= 1.0 - eps2;
                        arrivals.push(m);
                    }
                    Some(_) => p *= eps2,
                    // a silent AP has a single backhaul state
                    None if bh >> a & 1 == 1 => p = 0.0,
                    None => {}
                }
            }
            if p == 0.0 {
                continue;
            }
            match bs_rule(&arrivals, n_c, k, rule) {
                Some(m) if m < n_c => {
                    acc.cs += p;
                    if m == 0 {
                        acc.first_cs += p;
                    }
                }
                Some(m) => {
                    acc.ncs += p;
                    if m == n_c {
                        acc.first_ncs += p;
                    }
                }
                None => {}
            }
        }
        // next joint outcome
        let mut a = 0;
        loop {
            if a == l {
                return acc;
            }
            idx[a] += 1;
            if idx[a] < dist.len() {
                break;
            }
            idx[a] = 0;
            a += 1;
        }
    }
}

/// Poisson pmf by the product form, for small counts.
pub fn pmf(n: usize, lambda: f64) -> f64 {
    let mut p = (-lambda).exp();
    for i in 1..=n {
        p *= lambda / i as f64;
    }
    p
}

/// Throughputs and success rates averaged over Poisson counts truncated at
/// `n_max` per class. Returns `[R_c, R_cbar, Gamma_c, Gamma_cbar]`.
#[allow(clippy::too_many_arguments)]
pub fn metrics(l: usize, g_c: f64, g_b: f64, eps1: f64, eps2: f64, k: Tol, rule: Rule, n_max: usize) -> [f64; 4] {
    let mut r = [0.0; 4];
    let (zc, zb) = (1.0 - (-g_c).exp(), 1.0 - (-g_b).exp());
    for n_c in 0..=n_max {
        for n_b in 0..=n_max {
            let w = pmf(n_c, g_c) * pmf(n_b, g_b);
            if n_c + n_b == 0 || w < 1e-300 {
                continue;
            }
            let s = slot_probs(l, n_c, n_b, eps1, eps2, k, rule);
            r[0] += w * s.cs;
            r[1] += w * s.ncs;
            if n_c > 0 && zc > 0.0 {
                r[2] += w / zc * s.first_cs;
            }
            if n_b > 0 && zb > 0.0 {
                r[3] += w / zb * s.first_ncs;
            }
        }
    }
    r
}
