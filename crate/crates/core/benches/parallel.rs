//! One-worker pool against the full pool. Build with
//! `--no-default-features` to time the sequential fallback instead.

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use orthochain::opt::{maximize_weak, OptimizerOptions};
use orthochain::par;
use orthochain::process::mc::estimate;
use orthochain::process::{simulate_sup_square, AdversarialProcess, GeneratorKind, ProcessSampler};
use orthochain::series::{
    build_index_set, build_partition, make_measure, CoefficientSequence, Depth, MeasureKind,
};
use std::hint::black_box;

fn pools() -> [(&'static str, Option<usize>); 2] {
    [("one", Some(1)), ("all", None)]
}

fn simulation(c: &mut Criterion) {
    let coeffs = CoefficientSequence::power(1.0, 64).unwrap();
    let mut g = c.benchmark_group("simulate_sup_square");
    g.sample_size(10);
    for (name, workers) in pools() {
        g.bench_function(BenchmarkId::from_parameter(name), |b| {
            b.iter(|| {
                par::with_workers(workers, || {
                    simulate_sup_square(black_box(&coeffs), GeneratorKind::Gaussian, 20_000, 1)
                        .unwrap()
                })
            })
        });
    }
    g.finish();
}

fn adversarial(c: &mut Criterion) {
    let set = build_index_set(&CoefficientSequence::power(1.0, 64).unwrap()).unwrap();
    let tree = build_partition(&set, Depth::Auto).unwrap();
    let m = make_measure(&set, MeasureKind::Dirichlet { seed: 5 }).unwrap();
    let x = AdversarialProcess::new(&set, &tree, &m, 3).unwrap();
    let mut g = c.benchmark_group("adversarial_sup");
    g.sample_size(10);
    for (name, workers) in pools() {
        g.bench_function(BenchmarkId::from_parameter(name), |b| {
            b.iter(|| {
                par::with_workers(workers, || {
                    estimate(
                        10_000,
                        2,
                        || vec![0.0; x.len()],
                        |buf, rng| {
                            x.sample_into(rng, buf);
                            let hi = buf.iter().copied().fold(f64::NEG_INFINITY, f64::max);
                            let lo = buf.iter().copied().fold(f64::INFINITY, f64::min);
                            (hi - lo).powi(2)
                        },
                    )
                })
            })
        });
    }
    g.finish();
}

fn restarts(c: &mut Criterion) {
    let set = build_index_set(&CoefficientSequence::power(1.0, 64).unwrap()).unwrap();
    let opts = OptimizerOptions {
        max_iters: 300,
        restarts: 8,
        seed: 3,
        ..OptimizerOptions::default()
    };
    let mut g = c.benchmark_group("maximize_weak");
    g.sample_size(10);
    for (name, workers) in pools() {
        g.bench_function(BenchmarkId::from_parameter(name), |b| {
            b.iter(|| par::with_workers(workers, || maximize_weak(black_box(&set), &opts).unwrap()))
        });
    }
    g.finish();
}

criterion_group!(benches, simulation, adversarial, restarts);
criterion_main!(benches);
