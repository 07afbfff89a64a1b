//! Parallel against single-threaded execution of the hot kernels.
//!
//! `cargo bench` compares the default rayon pool with a one-thread pool;
//! `cargo bench --no-default-features` times the plain sequential build.

use cnpint_core::aao::{assemble, AaoSystem};
use cnpint_core::krylov::{gmres_right, GmresConfig};
use cnpint_core::precond::AlphaPreconditioner;
use cnpint_core::spatial::{GridSpec, Preset, SetId};
use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use std::hint::black_box;

fn system(n_t: usize) -> AaoSystem {
    let p = Preset::get(SetId::I);
    let grid = p.grid(n_t, GridSpec::UNIFORM).unwrap();
    let prob = p.problem_on(&grid).unwrap();
    assemble(&prob, p.t_final, n_t, None, &p.initial_value(&grid).unwrap()).unwrap()
}

fn pools() -> Vec<(&'static str, rayon::ThreadPool)> {
    let default = rayon::ThreadPoolBuilder::new().build().unwrap();
    let single = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
    vec![("default", default), ("one-thread", single)]
}

fn kernels(c: &mut Criterion) {
    let sys = system(24);
    let pc = AlphaPreconditioner::build(1e-3, &sys).unwrap();
    let v: Vec<f64> = (0..sys.dim()).map(|i| (i as f64 * 0.37).sin()).collect();
    let mut out = vec![0.0; sys.dim()];
    let cfg = GmresConfig { tol: 1e-9, ..Default::default() };

    let mut group = c.benchmark_group("set-I-nt24");
    group.sample_size(10);
    for (name, pool) in pools() {
        group.bench_function(BenchmarkId::new("apply_m", name), |b| {
            pool.install(|| b.iter(|| sys.apply(black_box(&v), &mut out).unwrap()))
        });
        group.bench_function(BenchmarkId::new("apply_inverse", name), |b| {
            pool.install(|| b.iter(|| pc.apply_inverse_into(black_box(&v), &mut out).unwrap()))
        });
        group.bench_function(BenchmarkId::new("gmres_palpha", name), |b| {
            pool.install(|| b.iter(|| gmres_right(&sys, &pc, black_box(sys.rhs().as_slice()), &cfg).unwrap()))
        });
    }
    group.finish();
}

criterion_group!(benches, kernels);
criterion_main!(benches);
