//! Closed forms against direct truncated sums over the validation grid.

use gfra_core::erasure::{closed, series, ErasureModel};
use gfra_core::{SlotLoads, Tolerance};

const APS: [u32; 4] = [1, 2, 3, 5];
const EPS: [f64; 3] = [0.1, 0.5, 0.9];
const LOAD_PER_SLOT: [f64; 4] = [0.25, 1.0, 2.0, 4.0];
const GAMMA_C: [f64; 3] = [0.1, 0.5, 0.9];
const TOLERANCES: [u32; 4] = [0, 1, 2, 5];

fn rel(a: f64, b: f64) -> f64 {
    if a == b {
        0.0
    } else {
        (a - b).abs() / a.abs().max(b.abs())
    }
}

#[test]
fn closed_forms_match_series_on_grid() {
    let mut worst = [0.0f64; 7];
    let mut count = 0;
    for &l in &APS {
        for &e1 in &EPS {
            for &e2 in &EPS {
                let m = ErasureModel::new(l, e1, e2).unwrap();
                for &g in &LOAD_PER_SLOT {
                    let c = closed::throughput_cs_single(&m, g).unwrap();
                    worst[0] = worst[0].max(rel(c.value, series::throughput_cs_single(&m, g).unwrap()));
                    let c = closed::psr_cs_single(&m, g).unwrap();
                    worst[1] = worst[1].max(rel(c.value, series::psr_cs_single(&m, g).unwrap()));
                    let c = closed::benchmark_bound(&m, g).unwrap();
                    worst[2] = worst[2].max(rel(c.value, series::benchmark_bound(&m, g).unwrap()));
                    for &gc in &GAMMA_C {
                        let loads = SlotLoads {
                            cs: gc * g,
                            ncs: (1.0 - gc) * g,
                        };
                        let c = closed::throughput_ncs_ideal(&m, loads).unwrap();
                        let s = series::throughput_ncs(&m, loads, Tolerance::Infinite).unwrap();
                        worst[3] = worst[3].max(rel(c.value, s));
                        let c = closed::psr_ncs_ideal(&m, loads).unwrap();
                        let s = series::psr_ncs(&m, loads, series::ToleranceIndex::Infinite).unwrap();
                        worst[6] = worst[6].max(rel(c.value, s));
                        for &k in &TOLERANCES {
                            count += 1;
                            let c = closed::throughput_ncs_finite(&m, loads, k).unwrap();
                            let s = series::throughput_ncs(&m, loads, Tolerance::Finite(k)).unwrap();
                            worst[4] = worst[4].max(rel(c.value, s));
                            if l <= k + 1 {
                                let c = closed::throughput_cs_finite_small(&m, loads, k).unwrap();
                                let s = series::throughput_cs(&m, loads, Tolerance::Finite(k)).unwrap();
                                worst[5] = worst[5].max(rel(c.value, s));
                            }
                        }
                    }
                }
            }
        }
    }
    println!("{count} configs, worst relative gaps {worst:?}");
    for w in worst {
        assert!(w <= 1e-8, "{worst:?}");
    }
}
