use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion, Throughput};
use std::hint::black_box;

use ckls_bench::reference_params;
use ckls_core::engine::{euler_ckls, explicit_path, explicit_r_batch, NoiseMatrix, TimeGrid};
use ckls_core::girsanov::simulate_weighted;
use ckls_core::Variant;

fn euler(c: &mut Criterion) {
    let grid = TimeGrid::new(0.5, 512).unwrap();
    let noise = NoiseMatrix::new(1, &grid, 1000);
    let mut group = c.benchmark_group("euler_1000x512");
    group.throughput(Throughput::Elements(1000 * 512));
    for (label, p) in reference_params() {
        group.bench_with_input(BenchmarkId::new("ckls", label), &p, |b, p| {
            b.iter(|| euler_ckls(p, &grid, &noise, 1).unwrap())
        });
        group.bench_with_input(BenchmarkId::new("weighted", label), &p, |b, p| {
            b.iter(|| simulate_weighted(p, Variant::Derived, &grid, &noise, 1, |path| path.terminal()).unwrap())
        });
    }
    group.finish();
}

fn explicit(c: &mut Criterion) {
    let mut group = c.benchmark_group("explicit");
    for (label, p) in reference_params() {
        group.throughput(Throughput::Elements(10_000));
        group.bench_with_input(BenchmarkId::new("terminal_10k", label), &p, |b, p| {
            b.iter(|| explicit_r_batch(p, Variant::Derived, 0.5, 10_000, 7, 1).unwrap())
        });
        let grid = TimeGrid::new(1.0, 1024).unwrap();
        let noise = NoiseMatrix::new(3, &grid, 1);
        let dw = noise.row(0);
        let mut aux = vec![0.0; 1024];
        noise.fill_aux_normals(0, &mut aux);
        group.throughput(Throughput::Elements(1024));
        group.bench_with_input(BenchmarkId::new("path_1024", label), &p, |b, p| {
            b.iter(|| explicit_path(p, Variant::Derived, grid.dt(), black_box(&dw), &aux).unwrap())
        });
    }
    group.finish();
}

criterion_group!(benches, euler, explicit);
criterion_main!(benches);
