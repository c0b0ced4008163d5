use std::collections::{BTreeSet, HashSet, VecDeque};

use depsim_core::batch::{plan_cobatch, plan_minibatch_baseline, BatchCount};
use depsim_core::cost::{t_preload, t_prev, t_prev_terms, t_sampling};
use depsim_core::extract::{boundary_vertices, extract_full, extract_sampled, extract_sampled_traced};
use depsim_core::gnn::{forward_full, DenseFeatures, LayerWeights};
use depsim_core::graph::{gen_random_graph, parse_edge_list, write_edge_list};
use depsim_core::partition::{hierarchical_partition, max_part_size, partition_mincut, partition_random};
use depsim_core::sim::{simulate_epoch, volume_audit, Strategy as SimStrategy};
use depsim_core::{
    ClusterSpec, Fanout, Graph, ModelSpec, Partition, PartitionMode, SamplingConfig, SimOptions, VertexId,
    WorkloadSpec,
};
use proptest::prelude::*;

fn small_graph() -> impl Strategy<Value = Graph> {
    (2usize..120, 0.0f64..8.0, any::<u64>())
        .prop_map(|(n, d, seed)| gen_random_graph(n, d.min((n - 1) as f64), seed).unwrap())
}

fn graph_and_parts(max_parts: usize) -> impl Strategy<Value = (Graph, usize, u64)> {
    (small_graph(), 1..=max_parts, any::<u64>()).prop_filter_map("parts <= n", |(g, k, s)| {
        (k <= g.num_vertices()).then_some((g, k, s))
    })
}

fn fanout() -> impl Strategy<Value = Fanout> {
    prop_oneof![(0usize..6).prop_map(Fanout::Limited), Just(Fanout::Unlimited)]
}

fn halo_set(g: &Graph, p: &Partition, s: usize, cfg: &SamplingConfig) -> BTreeSet<VertexId> {
    extract_sampled(g, p, s, cfg).unwrap().halo().iter().copied().collect()
}

fn cluster(servers: usize, gpus: usize) -> ClusterSpec {
    ClusterSpec {
        num_servers: servers,
        gpus_per_server: gpus,
        compute_vps: 5e5,
        internal_bw_vps: 2e6,
        external_bw_vps: 2e5,
        gpu_mem_bytes: 1 << 30,
    }
}

fn model(layers: usize) -> ModelSpec {
    ModelSpec {
        layers,
        hidden_dim: 8,
        feature_dim: 8,
        d_alpha: 1.5,
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn degrees_sum_to_edges_and_adjacency_is_symmetric(g in small_graph()) {
        let total: usize = g.vertices().map(|v| g.degree(v)).sum();
        prop_assert_eq!(total, g.num_edges());
        for v in g.vertices() {
            for &u in g.neighbors(v) {
                prop_assert!(g.neighbors(u).binary_search(&v).is_ok());
            }
        }
        prop_assert!(g.validate().is_ok());
    }

    #[test]
    fn edge_list_round_trips(g in small_graph()) {
        let text = write_edge_list(&g);
        let back = parse_edge_list(&text, true, "mem".as_ref()).unwrap();
        prop_assert_eq!(back, g);
    }

    #[test]
    fn generator_is_seed_deterministic(n in 20usize..300, d in 5.0f64..12.0, seed in any::<u64>()) {
        let d = d.min((n - 1) as f64);
        let a = gen_random_graph(n, d, seed).unwrap();
        prop_assert_eq!(&a, &gen_random_graph(n, d, seed).unwrap());
        if n as f64 * d >= 100.0 {
            prop_assert_ne!(&a, &gen_random_graph(n, d, seed.wrapping_add(1)).unwrap());
        }
    }

    #[test]
    fn partitions_are_balanced_deterministic_refinements(
        (g, servers, seed) in graph_and_parts(3),
        gpus in 1usize..3,
        mincut in any::<bool>(),
    ) {
        prop_assume!(servers * gpus <= g.num_vertices());
        let mode = if mincut { PartitionMode::MinCut } else { PartitionMode::Random };
        let h = hierarchical_partition(&g, servers, gpus, mode, seed, 0.05).unwrap();
        prop_assert!(h.is_refinement());
        for v in g.vertices() {
            prop_assert_eq!(h.server_of_gpu(h.gpus.part_of(v)), h.servers.part_of(v));
        }
        prop_assert_eq!(&h, &hierarchical_partition(&g, servers, gpus, mode, seed, 0.05).unwrap());
        let p = partition_mincut(&g, servers, seed, 0.05).unwrap();
        let cap = max_part_size(g.num_vertices(), servers, 0.05);
        prop_assert!(p.part_sizes().iter().all(|&s| s >= 1 && s <= cap));
        let r = partition_random(&g, servers, seed).unwrap();
        prop_assert!(r.part_sizes().iter().max().unwrap() - r.part_sizes().iter().min().unwrap() <= 1);
    }

    #[test]
    fn sampled_halo_laws(
        (g, parts, seed) in graph_and_parts(4),
        m in 0usize..4,
        k in fanout(),
        k2 in fanout(),
    ) {
        let p = partition_random(&g, parts, seed).unwrap();
        let (lo, hi) = if k.limit() <= k2.limit() { (k, k2) } else { (k2, k) };
        for s in 0..parts {
            let base = SamplingConfig::new(m, lo, seed);
            let h = halo_set(&g, &p, s, &base);
            let full: BTreeSet<_> = extract_full(&g, &p, s, m).unwrap().halo().iter().copied().collect();
            prop_assert!(h.is_subset(&full));
            prop_assert!(h.is_subset(&halo_set(&g, &p, s, &SamplingConfig::new(m, hi, seed))));
            prop_assert!(h.is_subset(&halo_set(&g, &p, s, &SamplingConfig::new(m + 1, lo, seed))));
            prop_assert_eq!(halo_set(&g, &p, s, &SamplingConfig::exhaustive(m)), full);

            let boundary = boundary_vertices(&g, &p, s).unwrap().len() as f64;
            let kf = lo.limit().min(g.num_vertices()) as f64;
            let bound: f64 = (1..=m as i32).map(|hop| kf.powi(hop) * boundary).sum();
            prop_assert!(h.len() as f64 <= bound);

            let (_, trace) = extract_sampled_traced(&g, &p, s, &base).unwrap();
            prop_assert!(trace.iter().all(|t| t.added.len() <= lo.limit()));
        }
    }

    #[test]
    fn cobatch_plans_cover_targets_and_shrink_with_depth(
        (g, servers, seed) in graph_and_parts(3),
        layers in 1usize..4,
        r in 1usize..5,
    ) {
        let p = partition_mincut(&g, servers, seed, 0.05).unwrap();
        let cfg = SamplingConfig::new(1, Fanout::Limited(3), seed);
        for s in 0..servers {
            let sub = extract_sampled(&g, &p, s, &cfg).unwrap();
            prop_assume!(r <= sub.inner().len());
            let plan = plan_cobatch(&sub, &g, layers, &cfg, BatchCount::Fixed(r), &model(layers)).unwrap();
            prop_assert_eq!(plan.r(), r);
            let mut all: Vec<_> = plan.batches.iter().flat_map(|b| b.target_vertices.clone()).collect();
            let count = all.len();
            all.sort_unstable();
            all.dedup();
            prop_assert_eq!(all.len(), count);
            prop_assert_eq!(&all[..], sub.inner());
            for b in &plan.batches {
                let mfg = &b.mfg_vertices_per_layer;
                prop_assert_eq!(mfg.len(), layers + 1);
                prop_assert!(mfg.windows(2).all(|w| w[0] >= w[1]));
                prop_assert_eq!(mfg[layers], b.target_vertices.len());
                prop_assert!(b.input_vertices().all(|v| sub.contains(v)));
            }
        }
    }

    #[test]
    fn shrinking_budget_never_lowers_r((g, servers, seed) in graph_and_parts(2), layers in 1usize..3) {
        let p = partition_mincut(&g, servers, seed, 0.05).unwrap();
        let cfg = SamplingConfig::default();
        let sub = extract_sampled(&g, &p, 0, &cfg).unwrap();
        let m = model(layers);
        let top = plan_cobatch(&sub, &g, layers, &cfg, BatchCount::Budget(u64::MAX), &m).unwrap();
        prop_assert_eq!(top.r(), 1);
        let mut prev = 1;
        for frac in [0.8, 0.6, 0.45, 0.3, 0.2] {
            let budget = (top.max_memory_bytes() as f64 * frac) as u64;
            match plan_cobatch(&sub, &g, layers, &cfg, BatchCount::Budget(budget.max(1)), &m) {
                Ok(plan) => {
                    prop_assert!(plan.r() >= prev);
                    prop_assert!(plan.max_memory_bytes() <= budget);
                    prev = plan.r();
                }
                Err(e) => {
                    prop_assert_eq!(e.category(), "capacity");
                    break;
                }
            }
        }
    }

    #[test]
    fn split_then_fetch_never_beats_cooperative_inputs(
        (g, servers, seed) in graph_and_parts(2),
        gpus in 1usize..4,
        layers in 1usize..3,
    ) {
        prop_assume!(servers * gpus <= g.num_vertices());
        let h = hierarchical_partition(&g, servers, gpus, PartitionMode::MinCut, seed, 0.05).unwrap();
        let m = model(layers);
        for s in 0..servers {
            let sub = extract_full(&g, &h.servers, s, layers).unwrap();
            let co = plan_cobatch(&sub, &g, layers, &SamplingConfig::exhaustive(layers), BatchCount::Fixed(1), &m).unwrap();
            let split: usize = (s * gpus..(s + 1) * gpus)
                .map(|gpu| {
                    plan_minibatch_baseline(&g, &h.gpus, gpu, layers, Fanout::Unlimited, seed, BatchCount::Fixed(1), &m)
                        .unwrap()
                        .input_vertex_total()
                })
                .sum();
            prop_assert!(split >= co.input_vertex_total());
        }
    }

    #[test]
    fn analytic_times_fall_with_faster_hardware(
        v in 1e3f64..1e8,
        d in 1.0f64..100.0,
        servers in 2usize..16,
        gpus in 2usize..8,
        c in 1e3f64..1e9,
        bi in 1e3f64..1e10,
        be in 1e3f64..1e10,
        layers in 1usize..64,
        d_alpha in 1.0f64..3.0,
        factor in 1.01f64..10.0,
    ) {
        let w = WorkloadSpec::new(v, v * d);
        let base = ClusterSpec { num_servers: servers, gpus_per_server: gpus, compute_vps: c, internal_bw_vps: bi, external_bw_vps: be, gpu_mem_bytes: 0 };
        let m = ModelSpec { layers, hidden_dim: 1, feature_dim: 1, d_alpha };
        let all = |c: &ClusterSpec| (t_prev(&w, c), t_preload(&w, c, &m), t_sampling(&w, c, 1, 15, 0.5));
        let t0 = all(&base);
        for faster in [
            ClusterSpec { compute_vps: c * factor, ..base },
            ClusterSpec { internal_bw_vps: bi * factor, ..base },
        ] {
            let t1 = all(&faster);
            prop_assert!(t1.0 < t0.0 && t1.1 < t0.1 && t1.2 < t0.2);
        }
        let ext = ClusterSpec { external_bw_vps: be * factor, ..base };
        let t1 = all(&ext);
        prop_assert!(t1.0 < t0.0);
        prop_assert_eq!(t1.1, t0.1);
        prop_assert_eq!(t1.2, t0.2);
        prop_assert!(t_prev_terms(&w, &base).external_s > 0.0);
        let single = ClusterSpec { num_servers: 1, ..base };
        prop_assert_eq!(t_prev_terms(&w, &single).external_s, 0.0);
    }

    #[test]
    fn far_inputs_do_not_reach_server_outputs(
        (g, parts, seed) in graph_and_parts(4),
        layers in 0usize..4,
        victim in any::<prop::sample::Index>(),
    ) {
        let p = partition_random(&g, parts, seed).unwrap();
        let x = DenseFeatures::random(g.num_vertices(), g.feature_dim(), seed);
        let w = LayerWeights::random(g.feature_dim(), 4, layers, seed);
        let base = forward_full(&g, &x, &w, layers).unwrap();
        let v = victim.index(g.num_vertices());
        let mut y = x.clone();
        for a in y.row_mut(v) {
            *a += 3.0;
        }
        let moved = forward_full(&g, &y, &w, layers).unwrap();
        for s in 0..parts {
            let sub = extract_full(&g, &p, s, layers).unwrap();
            if !sub.contains(v as VertexId) {
                let inner = sub.inner();
                prop_assert_eq!(base.select(inner), moved.select(inner));
            }
        }
    }

    #[test]
    fn relabeling_permutes_outputs(g in small_graph(), layers in 0usize..4, seed in any::<u64>()) {
        let n = g.num_vertices();
        let mut perm: Vec<VertexId> = (0..n as VertexId).collect();
        depsim_core::rng::keyed_shuffle(&mut perm, seed, 0);
        let pg = g.permuted(&perm);
        let x = DenseFeatures::random(n, g.feature_dim(), seed);
        let mut px = DenseFeatures::new(n, x.width(), vec![0.0; n * x.width()]).unwrap();
        for v in 0..n {
            px.row_mut(perm[v] as usize).copy_from_slice(x.row(v));
        }
        let w = LayerWeights::random(g.feature_dim(), 4, layers, seed);
        let a = forward_full(&g, &x, &w, layers).unwrap();
        let b = forward_full(&pg, &px, &w, layers).unwrap();
        for v in 0..n {
            for (p, q) in a.row(v).iter().zip(b.row(perm[v] as usize)) {
                prop_assert!((p - q).abs() <= 1e-9 * p.abs().max(1.0));
            }
        }
    }

    #[test]
    fn simulation_is_deterministic_conserving_and_audited(
        (g, servers, seed) in graph_and_parts(3),
        gpus in 1usize..3,
        layers in 1usize..4,
    ) {
        prop_assume!(servers * gpus <= g.num_vertices());
        let h = hierarchical_partition(&g, servers, gpus, PartitionMode::MinCut, seed, 0.05).unwrap();
        let c = cluster(servers, gpus);
        let m = model(layers);
        for strat in [SimStrategy::FullGraph, SimStrategy::SharedPreload, SimStrategy::PreloadEas(SamplingConfig::new(1, Fanout::Limited(2), seed))] {
            let a = simulate_epoch(&g, &h, &c, &m, &strat, &SimOptions::default()).unwrap();
            prop_assert_eq!(&a, &simulate_epoch(&g, &h, &c, &m, &strat, &SimOptions::default()).unwrap());
            let moved: u64 = a.workers.iter().map(|w| w.volumes.internal_vertices_moved + w.volumes.external_vertices_moved).sum();
            prop_assert_eq!(moved, a.aggregate.volumes.internal_vertices_moved + a.aggregate.volumes.external_vertices_moved);
            for w in &a.workers {
                prop_assert!(w.compute_s >= 0.0 && w.internal_comm_s >= 0.0 && w.external_comm_s >= 0.0);
                prop_assert!(w.total_s <= a.total_s());
            }
            prop_assert!(volume_audit(&a, &g, &h, &m, &strat).is_ok());
            if !matches!(strat, SimStrategy::FullGraph) {
                prop_assert_eq!(a.aggregate.volumes.external_vertices_moved, 0);
            }
        }
    }
}

/// Multi-source BFS written independently of the extractor.
fn bfs_closure(g: &Graph, inner: &[VertexId], hops: usize) -> HashSet<VertexId> {
    let mut dist = vec![usize::MAX; g.num_vertices()];
    let mut q = VecDeque::new();
    for &v in inner {
        dist[v as usize] = 0;
        q.push_back(v);
    }
    while let Some(v) = q.pop_front() {
        if dist[v as usize] == hops {
            continue;
        }
        for &u in g.neighbors(v) {
            if dist[u as usize] == usize::MAX {
                dist[u as usize] = dist[v as usize] + 1;
                q.push_back(u);
            }
        }
    }
    (0..g.num_vertices() as VertexId).filter(|&v| dist[v as usize] != usize::MAX).collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn full_extraction_is_the_bfs_closure((g, parts, seed) in graph_and_parts(4), layers in 0usize..5) {
        let p = partition_random(&g, parts, seed).unwrap();
        for s in 0..parts {
            let sub = extract_full(&g, &p, s, layers).unwrap();
            let got: HashSet<_> = sub.vertices().into_iter().collect();
            prop_assert_eq!(got, bfs_closure(&g, sub.inner(), layers));
        }
    }
}
