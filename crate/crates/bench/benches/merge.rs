use criterion::{black_box, criterion_group, criterion_main, BatchSize, BenchmarkId, Criterion};
use mergetree_core::harness::{
    sort_via_merge, workload_fig6, workload_interleave, workload_random, Backend, Workload,
};
use mergetree_core::reeb::{generate, pair_single_pass, pair_two_pass};
use mergetree_core::MergeableForest;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Times the measured ops of `w` on a forest already holding its setup.
fn bench_workload(c: &mut Criterion, w: &Workload, backends: &[Backend]) {
    let mut group = c.benchmark_group(format!("{}/{}", w.name, w.param));
    for &backend in backends {
        group.bench_function(BenchmarkId::from_parameter(backend), |b| {
            b.iter_batched(
                || {
                    let mut f = backend.build();
                    for op in &w.setup {
                        op.apply(&mut f).unwrap();
                    }
                    f
                },
                |mut f| {
                    for op in &w.ops {
                        black_box(op.apply(&mut f).unwrap());
                    }
                    f
                },
                BatchSize::LargeInput,
            )
        });
    }
    group.finish();
}

fn workloads(c: &mut Criterion) {
    let all = [Backend::Naive, Backend::Dyn, Backend::Rank, Backend::Implicit];
    bench_workload(c, &workload_fig6(30), &all);
    bench_workload(c, &workload_interleave(1024).unwrap(), &all);
    bench_workload(c, &workload_random(2000, 7), &all);
}

fn pairing(c: &mut Criterion) {
    let g = generate(11, 2000);
    let mut group = c.benchmark_group(format!("pair/{}", g.len()));
    for backend in [Backend::Naive, Backend::Dyn, Backend::Rank] {
        group.bench_function(BenchmarkId::new("single", backend), |b| {
            b.iter(|| pair_single_pass(&g, &mut backend.build()).unwrap())
        });
    }
    for backend in [Backend::Dyn, Backend::Implicit] {
        group.bench_function(BenchmarkId::new("twopass", backend), |b| {
            b.iter(|| pair_two_pass(&g, &mut backend.build(), &mut backend.build()).unwrap())
        });
    }
    group.finish();
}

fn sorting(c: &mut Criterion) {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let values: Vec<f64> = (0..1000).map(|_| rng.gen()).collect();
    let mut group = c.benchmark_group("sort/1000");
    for backend in [Backend::Dyn, Backend::Rank] {
        group.bench_function(BenchmarkId::from_parameter(backend), |b| {
            b.iter(|| {
                let mut f = backend.build();
                let out = sort_via_merge(&values, &mut f).unwrap();
                black_box(f.counters().merges);
                out
            })
        });
    }
    group.finish();
}

criterion_group!(benches, workloads, pairing, sorting);
criterion_main!(benches);
