use criterion::{criterion_group, criterion_main, Criterion, Throughput};
use gfra_bench::{erasure_mixed, fading_mixed};
use gfra_core::fading::estimate_fading_metrics;
use gfra_core::sim::run_erasure;
use std::hint::black_box;

fn erasure_frames(c: &mut Criterion) {
    let cfg = erasure_mixed();
    let mut group = c.benchmark_group("erasure_simulation");
    group.sample_size(20);
    group.throughput(Throughput::Elements(10_000));
    group.bench_function("10k_frames", |b| {
        b.iter(|| run_erasure(black_box(&cfg), 10_000, 1).unwrap())
    });
    group.finish();
}

fn fading_slots(c: &mut Criterion) {
    let cfg = fading_mixed();
    let mut group = c.benchmark_group("fading_simulation");
    group.sample_size(20);
    group.throughput(Throughput::Elements(50_000));
    group.bench_function("50k_slots", |b| {
        b.iter(|| estimate_fading_metrics(black_box(&cfg), 50_000, 1).unwrap())
    });
    group.finish();
}

criterion_group!(benches, erasure_frames, fading_slots);
criterion_main!(benches);
