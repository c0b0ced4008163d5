use criterion::{criterion_group, criterion_main, BatchSize, Criterion};
use depsim_bench::planted_fixture;
use depsim_core::batch::{plan_cobatch, BatchCount};
use depsim_core::extract::{extract_full, extract_sampled};
use depsim_core::graph::gen_random_graph;
use depsim_core::partition::{hierarchical_partition, partition_mincut};
use depsim_core::sim::{simulate_epoch, SimOptions, Strategy};
use depsim_core::{ClusterSpec, ModelSpec, PartitionMode, SamplingConfig};
use std::hint::black_box;

const N: usize = 20_000;

fn cluster() -> ClusterSpec {
    ClusterSpec {
        num_servers: 4,
        gpus_per_server: 2,
        compute_vps: 1e6,
        internal_bw_vps: 8e5,
        external_bw_vps: 1e5,
        gpu_mem_bytes: 1 << 30,
    }
}

fn model() -> ModelSpec {
    ModelSpec { layers: 3, hidden_dim: 64, feature_dim: 64, d_alpha: 1.5 }
}

fn bench_graph(c: &mut Criterion) {
    c.bench_function("gen_random_20k_d20", |b| b.iter(|| gen_random_graph(black_box(N), 20.0, 7).unwrap()));
    c.bench_function("gen_planted_20k", |b| b.iter(|| planted_fixture(black_box(N), 7)));
}

fn bench_partition(c: &mut Criterion) {
    let g = planted_fixture(N, 7);
    let mut group = c.benchmark_group("partition");
    group.sample_size(10);
    group.bench_function("mincut_4", |b| b.iter(|| partition_mincut(&g, 4, 1, 0.05).unwrap()));
    group.bench_function("hierarchical_4x2", |b| {
        b.iter(|| hierarchical_partition(&g, 4, 2, PartitionMode::MinCut, 1, 0.05).unwrap())
    });
    group.finish();
}

fn bench_extract_plan_sim(c: &mut Criterion) {
    let g = planted_fixture(N, 7);
    let h = hierarchical_partition(&g, 4, 2, PartitionMode::MinCut, 1, 0.05).unwrap();
    let m = model();
    let cfg = SamplingConfig::default();

    c.bench_function("extract_full_L3", |b| b.iter(|| extract_full(&g, &h.servers, 0, 3).unwrap()));
    c.bench_function("extract_sampled_m1_k15", |b| b.iter(|| extract_sampled(&g, &h.servers, 0, &cfg).unwrap()));

    let sub = extract_sampled(&g, &h.servers, 0, &cfg).unwrap();
    let mut group = c.benchmark_group("plan");
    group.sample_size(10);
    group.bench_function("cobatch_r4", |b| {
        b.iter(|| plan_cobatch(&sub, &g, 3, &cfg, BatchCount::Fixed(4), &m).unwrap())
    });
    group.finish();

    let mut group = c.benchmark_group("simulate");
    group.sample_size(10);
    let strategies = [
        ("full_graph", Strategy::FullGraph),
        ("preload", Strategy::SharedPreload),
        ("preload_eas", Strategy::PreloadEas(cfg)),
    ];
    for (name, strat) in strategies {
        group.bench_function(name, |b| {
            b.iter_batched(
                || strat.clone(),
                |s| simulate_epoch(&g, &h, &cluster(), &m, &s, &SimOptions::default()).unwrap(),
                BatchSize::SmallInput,
            )
        });
    }
    group.finish();
}

criterion_group!(benches, bench_graph, bench_partition, bench_extract_plan_sim);
criterion_main!(benches);
