use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BatchSize, BenchmarkId, Criterion, Throughput};
use interchange_core::engine::run;
use interchange_core::{ClusterState, CycleState, Hypercube, Replica, RunConfig, Threshold, Topology};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// A replica advanced to `t = cN` so the benchmarks see the supercritical regime.
fn warmed(n: u32, c: u64) -> (Replica, ChaCha8Rng) {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let mut r = Replica::new(Hypercube::new(n).unwrap());
    for _ in 0..c << n {
        r.step(&mut rng).unwrap();
    }
    (r, rng)
}

fn steps(c: &mut Criterion) {
    let mut group = c.benchmark_group("step");
    for n in [10u32, 14, 17] {
        let (replica, rng) = warmed(n, 2);
        group.throughput(Throughput::Elements(1_000));
        group.bench_with_input(BenchmarkId::from_parameter(n), &n, |b, _| {
            b.iter_batched(
                || (replica.clone(), rng.clone()),
                |(mut r, mut rng)| {
                    for _ in 0..1_000 {
                        black_box(r.step(&mut rng).unwrap());
                    }
                },
                BatchSize::LargeInput,
            )
        });
    }
    group.finish();
}

fn full_runs(c: &mut Criterion) {
    let mut group = c.benchmark_group("run_to_2N");
    group.sample_size(10);
    for n in [12u32, 16] {
        let mut config = RunConfig::new(n, 2 << n);
        config.thresholds = vec![Threshold::Exponent(0.1)];
        group.throughput(Throughput::Elements(2 << n));
        group.bench_with_input(BenchmarkId::from_parameter(n), &config, |b, cfg| b.iter(|| run(cfg).unwrap()));
    }
    group.finish();
}

fn queries(c: &mut Criterion) {
    let (replica, _) = warmed(16, 2);
    c.bench_function("long_cycle_mass_n16", |b| {
        b.iter(|| black_box(replica.cycles().vertices_in_long_cycles(black_box(64))))
    });
    c.bench_function("histogram_n16", |b| b.iter(|| black_box(replica.cycles().histogram())));
}

fn structures(c: &mut Criterion) {
    let q = Hypercube::new(14).unwrap();
    let edges: Vec<_> = {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        (0..2 << 14).map(|_| q.sample_edge(&mut rng)).collect()
    };
    let mut group = c.benchmark_group("structures_n14_2N");
    group.sample_size(10);
    group.bench_function("cycles", |b| {
        b.iter(|| {
            let mut s = CycleState::identity(q.vertex_count());
            for &e in &edges {
                s.apply_transposition(e);
            }
            s.num_cycles()
        })
    });
    group.bench_function("clusters", |b| {
        b.iter(|| {
            let mut s = ClusterState::singletons(&q);
            for &e in &edges {
                s.open_edge(&q, e);
            }
            s.num_clusters()
        })
    });
    group.finish();
}

criterion_group!(benches, steps, full_runs, queries, structures);
criterion_main!(benches);
