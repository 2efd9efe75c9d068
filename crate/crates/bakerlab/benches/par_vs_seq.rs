//! Data-parallel vs sequential throughput for the ensemble hot paths.
//!
//! The two paths are bit-identical in output; these benches measure what
//! the `parallel` feature buys on the current machine.

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};

use bakerlab::ensemble::{
    basin_raster, basin_raster_seq, ensemble_lambda_histogram, ensemble_lambda_histogram_seq,
    steady_state_consistency, DistributionSpec, DEFAULT_TOL,
};
use bakerlab::map::{apply_l, Point};
use bakerlab::Params;

fn bench_histogram(c: &mut Criterion) {
    let params = Params::new(0.2).unwrap();
    let count = 100_000u64;
    let steps = 10usize;
    let mut group = c.benchmark_group("lambda_histogram");
    group.sample_size(20);
    group.bench_with_input(BenchmarkId::new("parallel", count), &count, |b, &count| {
        b.iter(|| {
            ensemble_lambda_histogram(DistributionSpec::Uniform, count, 7, steps, &params).unwrap()
        })
    });
    group.bench_with_input(
        BenchmarkId::new("sequential", count),
        &count,
        |b, &count| {
            b.iter(|| {
                ensemble_lambda_histogram_seq(DistributionSpec::Uniform, count, 7, steps, &params)
                    .unwrap()
            })
        },
    );
    group.finish();
}

fn bench_raster(c: &mut Criterion) {
    let params = Params::new(0.2).unwrap();
    let resolution = 128usize;
    let mut group = c.benchmark_group("basin_raster");
    group.sample_size(10);
    group.bench_with_input(
        BenchmarkId::new("parallel", resolution),
        &resolution,
        |b, &res| b.iter(|| basin_raster(&params, res, 10_000, DEFAULT_TOL)),
    );
    group.bench_with_input(
        BenchmarkId::new("sequential", resolution),
        &resolution,
        |b, &res| b.iter(|| basin_raster_seq(&params, res, 10_000, DEFAULT_TOL)),
    );
    group.finish();
}

fn bench_steady_state(c: &mut Criterion) {
    let params = Params::new(0.1).unwrap();
    let mut group = c.benchmark_group("steady_state");
    group.sample_size(10);
    group.bench_function("consistency_50k", |b| {
        b.iter(|| steady_state_consistency(&params, 50_000, 7, 100).unwrap())
    });
    group.finish();
}

fn bench_map_step(c: &mut Criterion) {
    let params = Params::new(0.2).unwrap();
    c.bench_function("map_step_x1000", |b| {
        b.iter(|| {
            let mut p = Point { x: 0.31, y: 0.77 };
            for _ in 0..1000 {
                p = apply_l(p, &params);
            }
            p
        })
    });
}

criterion_group!(
    benches,
    bench_histogram,
    bench_raster,
    bench_steady_state,
    bench_map_step
);
criterion_main!(benches);
