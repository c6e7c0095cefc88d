use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use polariton_core::{
    build_hamiltonian, enumerate_sector, lowest_eigenpairs, EigenConfig, LatticeParams, MatrixFreeHamiltonian, DEFAULT_DIMENSION_CAP,
};

fn params(sites: usize) -> LatticeParams {
    LatticeParams::new(sites, 10_000.0, 0.0, 150.0, 150.0)
}

fn enumeration(c: &mut Criterion) {
    let mut group = c.benchmark_group("enumerate_sector");
    for m in [6, 7, 8] {
        group.bench_with_input(BenchmarkId::from_parameter(m), &m, |b, &m| {
            b.iter(|| enumerate_sector(black_box(m), m, DEFAULT_DIMENSION_CAP).unwrap())
        });
    }
    group.finish();
}

fn assembly(c: &mut Criterion) {
    let mut group = c.benchmark_group("build_hamiltonian");
    group.sample_size(20);
    for m in [6, 7, 8] {
        let basis = enumerate_sector(m, m, DEFAULT_DIMENSION_CAP).unwrap();
        group.bench_with_input(BenchmarkId::from_parameter(m), &m, |b, &m| {
            b.iter(|| build_hamiltonian(&params(m), black_box(&basis)).unwrap())
        });
    }
    group.finish();
}

fn matvec(c: &mut Criterion) {
    let mut group = c.benchmark_group("matvec_M8_N8");
    let basis = enumerate_sector(8, 8, DEFAULT_DIMENSION_CAP).unwrap();
    let p = params(8);
    let stored = build_hamiltonian(&p, &basis).unwrap();
    let free = MatrixFreeHamiltonian::new(&p, &basis).unwrap();
    let v: Vec<f64> = (0..basis.dim()).map(|i| ((i * 7919) % 1000) as f64 / 1000.0).collect();
    group.bench_function("csr", |b| b.iter(|| stored.apply(black_box(&v)).unwrap()));
    group.bench_function("matrix_free", |b| b.iter(|| free.apply(black_box(&v)).unwrap()));
    group.finish();
}

fn lanczos(c: &mut Criterion) {
    let mut group = c.benchmark_group("lanczos_k2");
    group.sample_size(10);
    for m in [6, 7] {
        let basis = enumerate_sector(m, m, DEFAULT_DIMENSION_CAP).unwrap();
        let h = build_hamiltonian(&params(m), &basis).unwrap();
        group.bench_with_input(BenchmarkId::from_parameter(m), &h, |b, h| {
            b.iter(|| lowest_eigenpairs(black_box(h), &EigenConfig::default()).unwrap())
        });
    }
    group.finish();
}

criterion_group!(benches, enumeration, assembly, matvec, lanczos);
criterion_main!(benches);
