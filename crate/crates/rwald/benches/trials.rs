//! Throughput comparison of the data-parallel trial loop against the
//! sequential fallback, plus the core per-trial kernels.

use criterion::{criterion_group, criterion_main, BatchSize, Criterion};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use std::hint::black_box;

use rwald::detector::{wald_statistic, DetectorConfig};
use rwald::montecarlo::{run_trials, run_trials_serial};
use rwald::presets;

fn trial_loop(c: &mut Criterion) {
    let detector = DetectorConfig::new(1e-2).unwrap();
    let scenario = presets::scenario1(0.2, None, detector).unwrap();
    let mut group = c.benchmark_group("trial_loop");
    group.sample_size(10);
    for n in [1024usize, 4096] {
        group.bench_function(format!("serial_n{n}"), |b| {
            b.iter(|| run_trials_serial(black_box(&scenario), n, 64, 42).unwrap())
        });
        group.bench_function(format!("parallel_n{n}"), |b| {
            b.iter(|| run_trials(black_box(&scenario), n, 64, 42).unwrap())
        });
    }
    group.finish();
}

fn per_trial_kernels(c: &mut Criterion) {
    let detector = DetectorConfig::new(1e-2).unwrap();
    let scenario = presets::scenario1(0.2, None, detector.clone()).unwrap();
    let n = 4096;
    let v = scenario.steering_vector(n).unwrap();
    let mut group = c.benchmark_group("kernels");
    group.sample_size(30);
    group.bench_function("generate_ar_n4096", |b| {
        b.iter_batched(
            || ChaCha8Rng::seed_from_u64(7),
            |mut rng| scenario.clutter().generate(n, &mut rng),
            BatchSize::SmallInput,
        )
    });
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let x = scenario.clutter().generate(n, &mut rng);
    group.bench_function("wald_statistic_n4096", |b| {
        b.iter(|| wald_statistic(black_box(&x), black_box(&v), &detector).unwrap())
    });
    group.finish();
}

criterion_group!(benches, trial_loop, per_trial_kernels);
criterion_main!(benches);
