use criterion::{criterion_group, criterion_main, Criterion};
use std::hint::black_box;

use hyperrep_bench::rho0_vectors;
use hyperrep_core::variety::{jacobian, local_dimension, ComplexResidual, QuaternionicResidual, ResidualMap};
use hyperrep_core::verify::{run_suite, VerifyConfig};

fn residuals(c: &mut Criterion) {
    let (xc, xq) = rho0_vectors();
    c.bench_function("complex residual", |b| b.iter(|| ComplexResidual::FIRST.eval(black_box(&xc)).unwrap()));
    c.bench_function("quaternionic residual", |b| b.iter(|| QuaternionicResidual::FIRST.eval(black_box(&xq)).unwrap()));
}

fn jacobians(c: &mut Criterion) {
    let (xc, xq) = rho0_vectors();
    c.bench_function("complex jacobian", |b| b.iter(|| jacobian(&ComplexResidual::FIRST, black_box(&xc)).unwrap()));
    c.bench_function("quaternionic jacobian", |b| b.iter(|| jacobian(&QuaternionicResidual::FIRST, black_box(&xq)).unwrap()));
}

fn dimensions(c: &mut Criterion) {
    let (xc, xq) = rho0_vectors();
    c.bench_function("complex local dimension", |b| b.iter(|| local_dimension(&ComplexResidual::FIRST, black_box(&xc)).unwrap()));
    c.bench_function("quaternionic local dimension", |b| b.iter(|| local_dimension(&QuaternionicResidual::FIRST, black_box(&xq)).unwrap()));
}

fn suite(c: &mut Criterion) {
    let cfg = VerifyConfig { scale: 0.05, ..Default::default() };
    let mut g = c.benchmark_group("verify");
    g.sample_size(10);
    g.bench_function("suite at 5%", |b| b.iter(|| run_suite(black_box(&cfg))));
    g.finish();
}

criterion_group!(benches, residuals, jacobians, dimensions, suite);
criterion_main!(benches);
