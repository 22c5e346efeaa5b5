use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use graphon_bench::random_graph;
use graphon_core::cut::{d_box_exact, d_box_heuristic, delta_hat, delta_ub_optimize};
use graphon_core::{CutConfig, DeltaMode};
use std::hint::black_box;

fn dbox(c: &mut Criterion) {
    let cfg = CutConfig::default();
    let mut group = c.benchmark_group("d_box");
    for n in [10, 14, 18] {
        let (g, h) = (random_graph(n, true, 1), random_graph(n, true, 2));
        group.bench_with_input(BenchmarkId::new("exact", n), &n, |b, _| {
            b.iter(|| d_box_exact(black_box(&g), black_box(&h), &cfg).unwrap())
        });
        group.bench_with_input(BenchmarkId::new("heuristic", n), &n, |b, _| {
            b.iter(|| d_box_heuristic(black_box(&g), black_box(&h), cfg.restarts, cfg.seed).unwrap())
        });
    }
    group.finish();
}

fn permutations(c: &mut Criterion) {
    let cfg = CutConfig::default();
    let (g, h) = (random_graph(6, true, 3), random_graph(6, true, 4));
    c.bench_function("delta_hat_exact_6", |b| {
        b.iter(|| delta_hat(black_box(&g), black_box(&h), DeltaMode::Exact, &cfg).unwrap())
    });
    let (g, h) = (random_graph(5, true, 5), random_graph(8, true, 6));
    c.bench_function("delta_ub_optimize_5_8", |b| {
        b.iter(|| delta_ub_optimize(black_box(&g), black_box(&h), 50, 0, &cfg).unwrap())
    });
}

criterion_group!(benches, dbox, permutations);
criterion_main!(benches);
