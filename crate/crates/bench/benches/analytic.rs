use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use gfra_bench::{erasure_mixed, erasure_single};
use gfra_core::erasure::{closed, series, ErasureModel};
use gfra_core::special::aux_h_row;
use gfra_core::superposition::{evaluate_superposition, Estimator};
use gfra_core::{evaluate_erasure, Receiver};
use std::hint::black_box;

fn single_service(c: &mut Criterion) {
    let mut group = c.benchmark_group("cs_single_throughput");
    for aps in [1, 5, 20] {
        let m = ErasureModel::new(aps, 0.5, 0.5).unwrap();
        group.bench_with_input(BenchmarkId::new("closed", aps), &m, |b, m| {
            b.iter(|| closed::throughput_cs_single(m, black_box(2.0)).unwrap())
        });
        group.bench_with_input(BenchmarkId::new("series", aps), &m, |b, m| {
            b.iter(|| series::throughput_cs_single(m, black_box(2.0)).unwrap())
        });
    }
    group.finish();
}

fn aux_recursion(c: &mut Criterion) {
    c.bench_function("aux_h_row_order_32", |b| {
        b.iter(|| aux_h_row(32, black_box(3.5)).unwrap())
    });
}

fn full_evaluation(c: &mut Criterion) {
    let cfg = erasure_mixed();
    c.bench_function("evaluate_erasure_mixed", |b| {
        b.iter(|| evaluate_erasure(black_box(&cfg)).unwrap())
    });
    let sup = cfg.with_receiver(Receiver::Superposition);
    c.bench_function("superposition_exact_l3", |b| {
        b.iter(|| evaluate_superposition(black_box(&sup), Estimator::default()).unwrap())
    });
    let far = erasure_single(200);
    c.bench_function("evaluate_erasure_l200", |b| {
        b.iter(|| evaluate_erasure(black_box(&far)).unwrap())
    });
}

criterion_group!(benches, single_service, aux_recursion, full_evaluation);
criterion_main!(benches);
