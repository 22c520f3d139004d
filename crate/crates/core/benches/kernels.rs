//! Statevector kernels on the rayon pool versus a single-thread pool.
//!
//! Built without the `parallel` feature both variants run sequentially, which
//! makes `cargo bench --no-default-features` the pure sequential baseline.

use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use spinstate::ansatz::{apply_ansatz, compile_ansatz, AnsatzSpec};
use spinstate::integrals::ActiveSpaceIntegrals;
use spinstate::mapping::build_qubit_hamiltonian;
use spinstate::statevector::{ExcitationGenerator, ExcitationKind, SparseOperator, StateVector};
use spinstate::vqe::ThetaInit;

const QUBITS: [usize; 3] = [12, 16, 20];

fn pools() -> Vec<(&'static str, rayon::ThreadPool)> {
    let threads = std::thread::available_parallelism().map_or(1, |n| n.get());
    vec![
        ("sequential", rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap()),
        ("rayon", rayon::ThreadPoolBuilder::new().num_threads(threads).build().unwrap()),
    ]
}

fn exponential(c: &mut Criterion) {
    let mut group = c.benchmark_group("pair_double_exponential");
    for n in QUBITS {
        let g = ExcitationGenerator::new(ExcitationKind::PairDouble { from: 0, to: n / 2 - 1 }, n).unwrap();
        let mut psi = StateVector::<f64>::random(n, 1);
        for (name, pool) in pools() {
            group.bench_with_input(BenchmarkId::new(name, n), &n, |b, _| {
                pool.install(|| b.iter(|| g.apply_exponential(black_box(&mut psi), 0.3).unwrap()))
            });
        }
    }
    group.finish();
}

fn circuit(c: &mut Criterion) {
    let mut group = c.benchmark_group("kupccgsd_circuit");
    group.sample_size(10);
    for n in [8, 12] {
        let m = n / 2;
        let program = compile_ansatz(&AnsatzSpec::kupccgsd(1), m, m / 2, m / 2).unwrap();
        let theta = ThetaInit::Uniform { seed: 2 }.build(program.n_parameters());
        let psi = StateVector::<f64>::random_in_sector(n, m / 2, m / 2, 3).unwrap();
        for (name, pool) in pools() {
            group.bench_with_input(BenchmarkId::new(name, n), &n, |b, _| {
                pool.install(|| b.iter(|| apply_ansatz(black_box(&psi), &program, &theta).unwrap()))
            });
        }
    }
    group.finish();
}

fn expectation(c: &mut Criterion) {
    let mut group = c.benchmark_group("hamiltonian_expectation");
    group.sample_size(10);
    for n in [8, 12] {
        let ints = ActiveSpaceIntegrals::random(n / 2, n / 4, n / 4, 4);
        let h = SparseOperator::<f64>::from_pauli_sum(&build_qubit_hamiltonian(&ints));
        let psi = StateVector::<f64>::random(n, 5);
        for (name, pool) in pools() {
            group.bench_with_input(BenchmarkId::new(name, n), &n, |b, _| {
                pool.install(|| b.iter(|| h.expectation(black_box(&psi)).unwrap()))
            });
        }
    }
    group.finish();
}

criterion_group!(benches, exponential, circuit, expectation);
criterion_main!(benches);
