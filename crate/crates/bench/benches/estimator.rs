use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use nalgebra::{DMatrix, DVector};
use std::hint::black_box;
use uirecon_bench::{example_bundle, gaussian_signal};
use uirecon_core::linalg::{stack_vectors, truncated_pinv};
use uirecon_core::{
    build_gains, invariant_zeros, step, EstimatorState, ExampleSystem, ToleranceSet,
};

fn gains(c: &mut Criterion) {
    let mut group = c.benchmark_group("build_gains");
    group.sample_size(10);
    for past in [5usize, 10, 20] {
        let (_, bundle) = example_bundle(ExampleSystem::StableZeros, past, 500, 1);
        group.bench_with_input(BenchmarkId::from_parameter(past), &bundle, |b, bundle| {
            b.iter(|| build_gains(black_box(bundle), ToleranceSet::default()).unwrap())
        });
    }
    group.finish();
}

fn online_step(c: &mut Criterion) {
    let (_, bundle) = example_bundle(ExampleSystem::StableZeros, 10, 500, 2);
    let gains = build_gains(&bundle, ToleranceSet::default()).unwrap();
    let window = stack_vectors(&gaussian_signal(
        3,
        gains.dims.past + gains.dims.delay + 1,
        2,
    ));
    c.bench_function("step", |b| {
        let mut state = EstimatorState::zeros(gains.dims);
        b.iter(|| step(&gains, &mut state, black_box(&window)).unwrap())
    });
    c.bench_function("solve", |b| {
        let past = DVector::zeros(gains.dims.past_len());
        b.iter(|| gains.solve(black_box(&past), black_box(&window)).unwrap())
    });
}

fn zeros(c: &mut Criterion) {
    for sys in ExampleSystem::ALL {
        let model = sys.build().unwrap();
        c.bench_function(&format!("invariant_zeros/{sys}"), |b| {
            b.iter(|| invariant_zeros(black_box(&model)).unwrap())
        });
    }
}

fn pinv(c: &mut Criterion) {
    let mut group = c.benchmark_group("truncated_pinv");
    for rows in [20usize, 60] {
        let cols = 500;
        let data = gaussian_signal(4, rows * cols, 1);
        let m = DMatrix::from_fn(rows, cols, |i, j| data[i * cols + j][0]);
        group.bench_with_input(BenchmarkId::from_parameter(rows), &m, |b, m| {
            b.iter(|| truncated_pinv(black_box(m), 1e-4).unwrap())
        });
    }
    group.finish();
}

criterion_group!(benches, gains, online_step, zeros, pinv);
criterion_main!(benches);
