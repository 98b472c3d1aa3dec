use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use lrcone_bench::{fibonacci_eigensystem, fibonacci_field};
use lrcone_core::lrbounds::{cone_grid_from, ConeQuantity};
use lrcone_core::manybody::{build_hamiltonian, jordan_wigner_c, Evolution};
use lrcone_core::onebody::{amplitude_row, eigensystem};
use lrcone_core::tracemap::{escape_time, trace_check};
use lrcone_core::transport::{front_position, log_spaced, Probe};
use lrcone_core::{build_operator, Scale};
use std::hint::black_box;

fn eigen(c: &mut Criterion) {
    let mut g = c.benchmark_group("eigensystem");
    g.sample_size(10);
    for n in [250, 1000, 2000] {
        let op = build_operator(&fibonacci_field(12.0, n));
        g.bench_with_input(BenchmarkId::from_parameter(n), &op, |b, op| {
            b.iter(|| eigensystem(black_box(op)).unwrap())
        });
    }
    g.finish();
}

fn propagation(c: &mut Criterion) {
    let eig = fibonacci_eigensystem(12.0, 2000);
    c.bench_function("amplitude_row/2000", |b| {
        b.iter(|| amplitude_row(&eig, 1, black_box(100.0), Scale::Fermion).unwrap())
    });
    c.bench_function("front_position/2000", |b| {
        b.iter(|| front_position(&eig, black_box(100.0), 1e-12, Probe::OutsideProbability, 50).unwrap())
    });
    let times = log_spaced(1.0, 100.0, 12).unwrap();
    let deltas: Vec<usize> = (1..=300).collect();
    let mut g = c.benchmark_group("cone_grid");
    g.sample_size(10);
    g.bench_function("2000x12x300", |b| {
        b.iter(|| cone_grid_from(&eig, &deltas, &times, ConeQuantity::FermionTail, 50).unwrap())
    });
    g.finish();
}

fn trace_map(c: &mut Criterion) {
    c.bench_function("escape_time/1000 energies", |b| {
        b.iter(|| {
            (0..1000)
                .filter(|i| escape_time(4.0, -3.0 + 0.01 * *i as f64, 200) == lrcone_core::Escape::Bounded)
                .count()
        })
    });
    c.bench_function("trace_check/k=12", |b| b.iter(|| trace_check(4.0, black_box(0.3), 12).unwrap()));
}

fn dense(c: &mut Criterion) {
    let mut g = c.benchmark_group("dense_heisenberg");
    g.sample_size(10);
    for n in [4, 6, 8] {
        let evo = Evolution::new(&build_hamiltonian(&fibonacci_field(1.0, n)).unwrap()).unwrap();
        let op = jordan_wigner_c(1, n).unwrap();
        g.bench_with_input(BenchmarkId::from_parameter(n), &(evo, op), |b, (evo, op)| {
            b.iter(|| evo.heisenberg(op, black_box(1.0)))
        });
    }
    g.finish();
}

criterion_group!(benches, eigen, propagation, trace_map, dense);
criterion_main!(benches);
