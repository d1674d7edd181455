//! Superposition receiver: per-allocation decode probabilities, the
//! averaged metrics and their relation to the collision receiver.

mod common;

use common::Rule;
use gfra_core::erasure::ErasureModel;
use gfra_core::superposition::{
    ap_allocation_probs, bs_decode_prob_cs, bs_decode_prob_ncs, class_metrics, evaluate_superposition, ApAllocation,
    Estimator,
};
use gfra_core::{Error, Receiver, ScenarioConfig, SlotLoads, Tolerance};
use proptest::prelude::*;

fn exact() -> Estimator {
    Estimator::default()
}

fn alloc(v: &[u32]) -> ApAllocation {
    ApAllocation::new(v.to_vec()).unwrap()
}

#[test]
fn allocation_cells() {
    assert_eq!(ap_allocation_probs(0, 0, 0.3, Tolerance::Infinite).unwrap(), vec![1.0]);
    assert_eq!(
        ap_allocation_probs(1, 0, 0.5, Tolerance::Infinite).unwrap(),
        vec![0.5, 0.5]
    );
    // silent, CS, NCS
    assert_eq!(
        ap_allocation_probs(1, 1, 0.5, Tolerance::Infinite).unwrap(),
        vec![0.25, 0.5, 0.25]
    );
    // the AP drops the CS packet when the NCS packet also survives
    assert_eq!(
        ap_allocation_probs(1, 1, 0.5, Tolerance::Finite(0)).unwrap(),
        vec![0.5, 0.25, 0.25]
    );
}

#[test]
fn decode_examples() {
    let inf = Tolerance::Infinite;
    // two copies of the lone CS message: 1 - eps2^2
    assert_eq!(bs_decode_prob_cs(&alloc(&[0, 2]), 1, 0, 0.5, inf).unwrap(), 0.75);
    assert_eq!(bs_decode_prob_cs(&alloc(&[3, 0, 0]), 1, 1, 0.5, inf).unwrap(), 0.0);
    assert_eq!(bs_decode_prob_cs(&alloc(&[0, 2]), 1, 0, 1.0, inf).unwrap(), 0.0);
    assert_eq!(bs_decode_prob_ncs(&alloc(&[1, 0, 2]), 1, 1, 0.5).unwrap(), 0.75);
    assert_eq!(bs_decode_prob_ncs(&alloc(&[0, 1, 2]), 1, 1, 0.0).unwrap(), 0.0);
    assert_eq!(bs_decode_prob_ncs(&alloc(&[3]), 0, 0, 0.5).unwrap(), 0.0);
    assert!(bs_decode_prob_ncs(&alloc(&[1, 2]), 1, 1, 0.5).is_err());
}

#[test]
fn erased_backhaul_gives_zero() {
    let r = class_metrics(
        3,
        0.3,
        1.0,
        Tolerance::Finite(1),
        SlotLoads { cs: 1.0, ncs: 1.0 },
        exact(),
    )
    .unwrap();
    assert_eq!(r.metrics.as_array(), [0.0; 4]);
}

#[test]
fn one_ap_coincides_with_collision() {
    for (e1, e2, gc, gb) in [(0.5, 0.5, 1.0, 1.0), (0.2, 0.3, 2.0, 0.5), (0.8, 0.1, 0.3, 3.0)] {
        for k in [Tolerance::Finite(0), Tolerance::Finite(2), Tolerance::Infinite] {
            let loads = SlotLoads { cs: gc, ncs: gb };
            let sup = class_metrics(1, e1, e2, k, loads, exact()).unwrap().metrics.as_array();
            let col = ErasureModel::new(1, e1, e2)
                .unwrap()
                .class_metrics(loads, k)
                .unwrap()
                .as_array();
            for i in 0..4 {
                assert!(
                    (sup[i] - col[i]).abs() <= 1e-8 * col[i].max(1e-12),
                    "{k} metric {i}: {} vs {}",
                    sup[i],
                    col[i]
                );
            }
        }
    }
}

#[test]
fn matches_brute_force_model() {
    for (l, e1, e2, gc, gb) in [
        (2, 0.5, 0.5, 0.5, 0.5),
        (3, 0.3, 0.4, 0.4, 0.4),
        (3, 0.6, 0.2, 0.3, 0.6),
    ] {
        for k in [Some(0), Some(1), None] {
            let tol = k.map_or(Tolerance::Infinite, Tolerance::Finite);
            let ours = class_metrics(l, e1, e2, tol, SlotLoads { cs: gc, ncs: gb }, exact())
                .unwrap()
                .metrics
                .as_array();
            let reference = common::metrics(l as usize, gc, gb, e1, e2, k, Rule::Superposition, 8);
            for i in 0..4 {
                assert!(
                    (ours[i] - reference[i]).abs() < 2e-7,
                    "L={l} K={k:?} metric {i}: {} vs {}",
                    ours[i],
                    reference[i]
                );
            }
        }
    }
}

#[test]
fn superposition_dominates_collision() {
    // the two-service throughput region configuration
    let base = ScenarioConfig::erasure(3, 2, 8.0, 0.5, 0.5, 0.5);
    for k in [Tolerance::Finite(2), Tolerance::Infinite] {
        let cfg = base.clone().with_tolerance(k);
        let col = gfra_core::evaluate_erasure(&cfg).unwrap();
        let sup = evaluate_superposition(&cfg.with_receiver(Receiver::Superposition), exact())
            .unwrap()
            .metrics;
        assert!(
            sup.r_c >= col.r_c && sup.r_cbar >= col.r_cbar,
            "{k}: {sup:?} vs {col:?}"
        );
        assert!(sup.gamma_c >= col.gamma_c && sup.gamma_cbar >= col.gamma_cbar);
        assert!(sup.is_consistent(1e-12));
    }
}

#[test]
fn sampled_allocations_agree_with_enumeration() {
    for (l, k) in [(3, Tolerance::Finite(2)), (4, Tolerance::Infinite)] {
        let loads = SlotLoads { cs: 1.5, ncs: 2.0 };
        let e = class_metrics(l, 0.5, 0.4, k, loads, exact())
            .unwrap()
            .metrics
            .as_array();
        let mc = class_metrics(
            l,
            0.5,
            0.4,
            k,
            loads,
            Estimator::ConditionedMc { samples: 400, seed: 9 },
        )
        .unwrap();
        let (m, se) = (mc.metrics.as_array(), mc.std_error.as_array());
        for i in 0..4 {
            assert!(se[i] > 0.0);
            assert!(
                (m[i] - e[i]).abs() <= 3.0 * se[i] + 1e-12,
                "L={l} metric {i}: {} vs {} (se {})",
                m[i],
                e[i],
                se[i]
            );
        }
    }
}

#[test]
fn sampled_allocations_do_not_depend_on_threads() {
    let run = |threads| {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .unwrap()
            .install(|| {
                class_metrics(
                    3,
                    0.5,
                    0.5,
                    Tolerance::Finite(1),
                    SlotLoads { cs: 1.0, ncs: 1.0 },
                    Estimator::ConditionedMc { samples: 50, seed: 4 },
                )
                .unwrap()
            })
    };
    assert_eq!(run(1), run(4));
}

#[test]
fn enumeration_budget_is_enforced() {
    let cfg = ScenarioConfig::erasure(5, 8, 16.0, 0.5, 0.5, 0.5).with_receiver(Receiver::Superposition);
    let err = evaluate_superposition(&cfg, Estimator::ExactEnum { limit: 1000 }).unwrap_err();
    assert!(matches!(err, Error::Capacity { .. }), "{err:?}");
    let cfg = cfg.with_receiver(Receiver::Collision);
    assert!(evaluate_superposition(&cfg, exact()).is_err());
}

fn allocation_case() -> impl Strategy<Value = (u32, u32, Vec<u32>, f64, u32)> {
    (0u32..4, 0u32..4, 1u32..6, 0.0f64..=1.0, 0u32..4).prop_flat_map(|(nc, nb, l, eps2, k)| {
        let cells = 1 + (nc + nb) as usize;
        (
            Just(nc),
            Just(nb),
            prop::collection::vec(0u32..=l, cells),
            Just(eps2),
            Just(k),
        )
    })
}

proptest! {
    #[test]
    fn decode_events_are_disjoint((nc, nb, counts, eps2, k) in allocation_case()) {
        let a = ApAllocation::new(counts).unwrap();
        for tol in [Tolerance::Finite(k), Tolerance::Infinite] {
            let cs = bs_decode_prob_cs(&a, nc, nb, eps2, tol).unwrap();
            let ncs = bs_decode_prob_ncs(&a, nc, nb, eps2).unwrap();
            prop_assert!(cs >= 0.0 && ncs >= 0.0 && cs + ncs <= 1.0 + 1e-12);
        }
    }

    #[test]
    fn allocation_cells_sum_to_one(nc in 0u32..8, nb in 0u32..8, eps1 in 0.0f64..=1.0, k in 0u32..4) {
        for tol in [Tolerance::Finite(k), Tolerance::Infinite] {
            let p = ap_allocation_probs(nc, nb, eps1, tol).unwrap();
            prop_assert_eq!(p.len(), 1 + (nc + nb) as usize);
            prop_assert!((p.iter().sum::<f64>() - 1.0).abs() < 1e-12);
            prop_assert!(p.iter().all(|&x| x >= 0.0));
        }
    }
}
