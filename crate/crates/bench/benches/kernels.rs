use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use std::hint::black_box;

use semline_bench::{dense_map, sparse_map};
use semline_core::frontend::build_pyramid;
use semline_core::geometry::HoughGridSpec;
use semline_core::hough::{aggregate_pyramid, vote_optimized, vote_reference, Kernel};

fn voting(c: &mut Criterion) {
    let spec = HoughGridSpec::new(150, 150).unwrap();
    let mut group = c.benchmark_group("vote");
    group.sample_size(10);
    for (label, map) in [
        ("dense_600", dense_map(600, 600, 1)),
        ("sparse10_1200", sparse_map(1200, 1200, 0.1, 2)),
        ("dense_1200", dense_map(1200, 1200, 3)),
    ] {
        let geom = map.geometry();
        group.bench_with_input(BenchmarkId::new("reference", label), &map, |b, m| {
            b.iter(|| vote_reference(black_box(m), &spec, &geom).unwrap())
        });
        group.bench_with_input(BenchmarkId::new("optimized", label), &map, |b, m| {
            b.iter(|| vote_optimized(black_box(m), &spec, &geom).unwrap())
        });
    }
    group.finish();
}

fn multiscale(c: &mut Criterion) {
    let spec = HoughGridSpec::new(150, 150).unwrap();
    let pyramid = build_pyramid(&sparse_map(1200, 1200, 0.05, 4)).unwrap();
    let mut group = c.benchmark_group("pyramid");
    group.sample_size(10);
    for kernel in [Kernel::Reference, Kernel::Optimized] {
        group.bench_function(kernel.to_string(), |b| {
            b.iter(|| aggregate_pyramid(black_box(&pyramid), &spec, kernel).unwrap())
        });
    }
    group.finish();
}

criterion_group!(benches, voting, multiscale);
criterion_main!(benches);
