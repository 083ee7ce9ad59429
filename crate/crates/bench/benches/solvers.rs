use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use std::hint::black_box;

use sbfe_bench::{address, tribes_ladder};
use sbfe_core::heuristics::boros_unyulurt;
use sbfe_core::solve::{opt_adaptive, opt_nonadaptive};
use sbfe_core::strategy::expected_cost_exact;
use sbfe_core::Strategy;

fn adaptive(c: &mut Criterion) {
    let mut group = c.benchmark_group("opt_adaptive");
    group.sample_size(10);
    for (label, inst) in tribes_ladder() {
        group.bench_with_input(BenchmarkId::from_parameter(label), &inst, |b, inst| {
            b.iter(|| opt_adaptive(black_box(inst)).unwrap())
        });
    }
    group.finish();
}

fn nonadaptive(c: &mut Criterion) {
    let mut group = c.benchmark_group("opt_nonadaptive");
    group.sample_size(10);
    for (label, inst) in tribes_ladder().into_iter().take(3) {
        group.bench_with_input(BenchmarkId::from_parameter(label), &inst, |b, inst| {
            b.iter(|| opt_nonadaptive(black_box(inst)).unwrap())
        });
    }
    let inst = address(3);
    group.bench_function("address_3", |b| b.iter(|| opt_nonadaptive(black_box(&inst)).unwrap()));
    group.finish();
}

fn exact_cost(c: &mut Criterion) {
    let mut group = c.benchmark_group("expected_cost_exact");
    for (label, inst) in tribes_ladder() {
        let policy = Strategy::policy(boros_unyulurt(&inst).unwrap());
        group.bench_with_input(BenchmarkId::from_parameter(label), &inst, |b, inst| {
            b.iter(|| expected_cost_exact(black_box(inst), &policy).unwrap())
        });
    }
    group.finish();
}

criterion_group!(benches, adaptive, nonadaptive, exact_cost);
criterion_main!(benches);
