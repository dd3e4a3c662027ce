//! Hot kernels, single-threaded versus the global rayon pool.
//!
//! Without the `parallel` feature only the sequential variant is measured.

use std::f64::consts::FRAC_PI_8;
use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use telecluster::analysis::{all_permutations, search_cluster_angles_n2};
use telecluster::bases::{AngleSchedule, SignConvention};
use telecluster::measurement::build_pi_basis;
use telecluster::protocols::teleport_exhaustive;
use telecluster::qcore::{PartialTrace, StateVector};
use telecluster::resource::ResourceState;

fn resource(n: usize) -> ResourceState {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let a = AngleSchedule::random(n, &mut rng);
    let b = AngleSchedule::random(n, &mut rng);
    ResourceState::from_schedules(&a, &b, SignConvention::Faithful).unwrap()
}

#[cfg(feature = "parallel")]
fn modes() -> Vec<(&'static str, Option<rayon::ThreadPool>)> {
    let single = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
    vec![("sequential", Some(single)), ("parallel", None)]
}

#[cfg(feature = "parallel")]
fn in_mode<T: Send>(pool: &Option<rayon::ThreadPool>, f: impl FnOnce() -> T + Send) -> T {
    match pool {
        Some(p) => p.install(f),
        None => f(),
    }
}

#[cfg(not(feature = "parallel"))]
fn modes() -> Vec<(&'static str, Option<()>)> {
    vec![("sequential", None)]
}

#[cfg(not(feature = "parallel"))]
fn in_mode<T>(_: &Option<()>, f: impl FnOnce() -> T) -> T {
    f()
}

fn kernels(c: &mut Criterion) {
    let modes = modes();

    let mut g = c.benchmark_group("teleport_exhaustive");
    g.sample_size(10);
    for n in [3usize, 4] {
        let r = resource(n);
        let phi = StateVector::random(n, &mut ChaCha8Rng::seed_from_u64(2));
        for (name, pool) in &modes {
            g.bench_with_input(BenchmarkId::new(*name, n), &n, |b, _| {
                b.iter(|| in_mode(pool, || black_box(teleport_exhaustive(&phi, &r).unwrap())))
            });
        }
    }
    g.finish();

    let mut g = c.benchmark_group("build_pi_basis");
    g.sample_size(10);
    for n in [3usize, 4] {
        let r = resource(n);
        for (name, pool) in &modes {
            g.bench_with_input(BenchmarkId::new(*name, n), &n, |b, _| {
                b.iter(|| in_mode(pool, || black_box(build_pi_basis(r.basis_a(), r.basis_b()).unwrap())))
            });
        }
    }
    g.finish();

    let mut g = c.benchmark_group("partial_trace");
    let psi = StateVector::random(18, &mut ChaCha8Rng::seed_from_u64(3));
    for (name, pool) in &modes {
        g.bench_function(BenchmarkId::new(*name, 18), |b| {
            b.iter(|| in_mode(pool, || black_box(psi.partial_trace(&[8, 17]).unwrap())))
        });
    }
    g.finish();

    let mut g = c.benchmark_group("cluster_search_n2");
    g.sample_size(10);
    let perms = all_permutations(4);
    for (name, pool) in &modes {
        g.bench_function(*name, |b| {
            b.iter(|| in_mode(pool, || black_box(search_cluster_angles_n2(FRAC_PI_8, &perms).unwrap())))
        });
    }
    g.finish();
}

criterion_group!(benches, kernels);
criterion_main!(benches);
