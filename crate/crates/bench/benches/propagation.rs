use criterion::{criterion_group, criterion_main, Criterion};
use spinchain::dynamics::{propagate_lindblad, propagate_unitary, propagator, DecoherenceSpec};
use spinchain::hamiltonians::chain_hamiltonian;
use spinchain::trion::{exact_flip_rate, TrionParams};
use spinchain::ChainConfig;
use spinchain_bench::{basis, cnot, detuned_z};

fn hamiltonian(c: &mut Criterion) {
    let five = ChainConfig::from_pattern("ABCDA", 1.0).unwrap();
    c.bench_function("chain_hamiltonian_ABCDA", |b| b.iter(|| chain_hamiltonian(&five)));
}

fn cnot_propagation(c: &mut Criterion) {
    let f = cnot().unwrap();
    let psi = basis(&f.config, "10").unwrap();
    c.bench_function("cnot_propagator", |b| b.iter(|| propagator(&f.schedule, &f.config).unwrap()));
    c.bench_function("cnot_trajectory_dt0.05", |b| {
        b.iter(|| propagate_unitary(&f.schedule, &f.config, &psi, 0.05).unwrap())
    });
}

fn lindblad(c: &mut Criterion) {
    let rabi = 10.0;
    let f = detuned_z(rabi).unwrap();
    let rho = basis(&f.config, "0").unwrap().to_density();
    let dec = DecoherenceSpec::new(0.1 / rabi).unwrap();
    let mut g = c.benchmark_group("lindblad");
    g.sample_size(20);
    g.bench_function("detuned_z_alpha0.1", |b| {
        b.iter(|| propagate_lindblad(&f.schedule, &f.config, &rho, &dec, f.schedule.total_duration()).unwrap())
    });
    g.finish();
}

fn trion(c: &mut Criterion) {
    let p = TrionParams::new(5.0, 26f64.to_radians(), 100.0).unwrap();
    c.bench_function("trion_exact_flip_rate", |b| b.iter(|| exact_flip_rate(&p)));
}

criterion_group!(benches, hamiltonian, cnot_propagation, lindblad, trion);
criterion_main!(benches);
