use std::io::Write as _;
use std::path::Path;

use depsim_core::batch::{plan_cobatch, plan_minibatch_baseline, BatchCount, BatchPlan};
use depsim_core::cost::{
    check_validity, crossover_layer, preload_predicted_faster, speedup_threshold, t_preload, t_prev, t_sampling,
    ClusterSpec,
};
use depsim_core::extract::{extract, extract_full, extract_sampled};
use depsim_core::gnn::equivalence_check;
use depsim_core::graph::{gen_planted_partition_graph, gen_random_graph, load_edge_list, write_edge_list};
use depsim_core::partition::{evaluate_cut, hierarchical_partition, load_partition, write_partition, DEFAULT_EPSILON};
use depsim_core::sim::{compare_strategies, simulate_epoch, EpochMode, SimOptions, SyncMode};
use depsim_core::{
    Error, Fanout, Graph, HierarchicalPartition, ModelSpec, PartitionMode, Result, SamplingConfig, Strategy,
    WorkloadSpec,
};
use serde_json::json;

use crate::args::{ExtractArgs, GenArgs, PartitionArgs, PlanArgs, RunArgs};
use crate::config::{GeneratorSpec, RunConfig};

pub fn write_output(path: Option<&Path>, text: &str) -> Result<()> {
    match path {
        Some(p) => std::fs::write(p, text).map_err(|source| Error::Io {
            path: p.to_path_buf(),
            source,
        }),
        None => {
            let mut out = std::io::stdout().lock();
            out.write_all(text.as_bytes())
                .and_then(|()| out.flush())
                .map_err(|source| Error::Io {
                    path: "<stdout>".into(),
                    source,
                })
        }
    }
}

fn generate(spec: &GeneratorSpec, seed: u64) -> Result<Graph> {
    let n = spec.n.ok_or_else(|| Error::Input("generator needs --n".into()))?;
    match spec.blocks {
        Some(blocks) => {
            let (Some(p_in), Some(p_out)) = (spec.p_in, spec.p_out) else {
                return Err(Error::Input("planted generator needs --p-in and --p-out".into()));
            };
            gen_planted_partition_graph(n, blocks, p_in, p_out, seed)
        }
        None => {
            let d = spec.avg_degree.ok_or_else(|| Error::Input("generator needs --avg-degree".into()))?;
            gen_random_graph(n, d, seed)
        }
    }
}

pub fn load_graph(cfg: &RunConfig) -> Result<Graph> {
    let g = match (cfg.graph_path(), &cfg.file.generate) {
        (Some(p), _) => load_edge_list(p, !cfg.directed())?,
        (None, Some(spec)) => generate(spec, cfg.seed())?,
        (None, None) => return Err(Error::Input("missing --graph".into())),
    };
    Ok(g.with_feature_dim(cfg.feature_dim()))
}

/// Partition file plus the GPUs-per-server grouping from its header, the
/// cluster spec, or one GPU per server, in that order.
pub fn load_hierarchy(cfg: &RunConfig, g: &Graph) -> Result<HierarchicalPartition> {
    let (p, header) = load_partition(cfg.partition_path()?)?;
    let per_server = match header {
        Some(k) => k,
        None if cfg.has_cluster() => cfg.cluster()?.gpus_per_server,
        None => 1,
    };
    if p.num_vertices() != g.num_vertices() {
        return Err(Error::Input(format!(
            "partition covers {} vertices but graph has {}",
            p.num_vertices(),
            g.num_vertices()
        )));
    }
    HierarchicalPartition::from_gpu_partition(p, per_server)
}

pub fn cmd_gen(a: GenArgs) -> Result<()> {
    let cfg = RunConfig::new(a.run)?;
    let base = cfg.file.generate.clone().unwrap_or_default();
    let spec = GeneratorSpec {
        n: a.n.or(base.n),
        avg_degree: a.avg_degree.or(base.avg_degree),
        blocks: a.blocks.or(base.blocks),
        p_in: a.p_in.or(base.p_in),
        p_out: a.p_out.or(base.p_out),
    };
    let g = generate(&spec, cfg.seed())?;
    write_output(cfg.out(), &write_edge_list(&g))
}

pub fn cmd_partition(a: PartitionArgs) -> Result<()> {
    let cfg = RunConfig::new(a.run)?;
    let g = load_graph(&cfg)?;
    let servers = a.servers.or(cfg.file.servers).unwrap_or(1);
    let gpus = a.gpus.or(cfg.file.gpus).unwrap_or(1);
    let mode: PartitionMode = a
        .mode
        .as_deref()
        .or(cfg.file.mode.as_deref())
        .unwrap_or("mincut")
        .parse()?;
    let epsilon = a.epsilon.or(cfg.file.epsilon).unwrap_or(DEFAULT_EPSILON);
    let h = hierarchical_partition(&g, servers, gpus, mode, cfg.seed(), epsilon)?;
    write_output(cfg.out(), &write_partition(&h.gpus, Some(gpus)))?;
    let cut = evaluate_cut(&g, &h.servers)?;
    eprintln!(
        "server edge_cut {} of {} ({:.4}), balance {:.4}",
        cut.edge_cut, cut.total_edges, cut.cut_fraction, cut.balance_ratio
    );
    Ok(())
}

pub fn cmd_extract(a: ExtractArgs) -> Result<()> {
    let cfg = RunConfig::new(a.run)?;
    let g = load_graph(&cfg)?;
    let h = load_hierarchy(&cfg, &g)?;
    let sampling = cfg.explicit_sampling()?;
    let servers: Vec<usize> = match a.server {
        Some(s) => vec![s],
        None => (0..h.num_servers()).collect(),
    };
    let mut out = String::new();
    for s in servers {
        out.push_str(&extract(&g, &h.servers, s, cfg.layers(), sampling.as_ref())?.dump());
    }
    write_output(cfg.out(), &out)
}

fn batch_count(cfg: &RunConfig, cluster: Option<&ClusterSpec>) -> BatchCount {
    match (cfg.batches(), cfg.mem_budget()) {
        (Some(r), _) => BatchCount::Fixed(r),
        (None, Some(b)) => BatchCount::Budget(b),
        (None, None) => BatchCount::Budget(cluster.map_or(u64::MAX, |c| c.gpu_mem_bytes)),
    }
}

/// One cooperative plan per server. Explicit sampling flags switch both the
/// server subgraph and each batch's boundary to sampled dependencies.
pub fn cobatch_plans(
    cfg: &RunConfig,
    g: &Graph,
    h: &HierarchicalPartition,
    model: &ModelSpec,
    count: BatchCount,
) -> Result<Vec<BatchPlan>> {
    let layers = model.layers;
    let sampling = cfg.explicit_sampling()?;
    (0..h.num_servers())
        .map(|s| {
            let (sub, batch_cfg) = match &sampling {
                Some(c) => (extract_sampled(g, &h.servers, s, c)?, *c),
                None => (extract_full(g, &h.servers, s, layers)?, SamplingConfig::exhaustive(layers)),
            };
            plan_cobatch(&sub, g, layers, &batch_cfg, count, model)
        })
        .collect()
}

pub fn cmd_plan(a: PlanArgs) -> Result<()> {
    let cfg = RunConfig::new(a.run)?;
    let g = load_graph(&cfg)?;
    let h = load_hierarchy(&cfg, &g)?;
    let model = cfg.model()?;
    let cluster = if cfg.has_cluster() { Some(cfg.cluster()?) } else { None };
    let count = batch_count(&cfg, cluster.as_ref());
    let plans = if a.baseline {
        let fanout = cfg.explicit_sampling()?.map_or(Fanout::Unlimited, |s| s.fanout);
        (0..h.gpus.num_parts())
            .map(|gpu| plan_minibatch_baseline(&g, &h.gpus, gpu, model.layers, fanout, cfg.seed(), count, &model))
            .collect::<Result<Vec<_>>>()?
    } else {
        cobatch_plans(&cfg, &g, &h, &model, count)?
    };
    let summaries: Vec<_> = plans.iter().map(BatchPlan::summary).collect();
    let mut text = serde_json::to_string_pretty(&summaries)?;
    text.push('\n');
    write_output(cfg.out(), &text)
}

pub fn build_strategy(
    name: &str,
    cfg: &RunConfig,
    g: &Graph,
    h: &HierarchicalPartition,
    model: &ModelSpec,
    cluster: &ClusterSpec,
) -> Result<Strategy> {
    Ok(match name {
        "full-graph" => Strategy::FullGraph,
        "preload" => Strategy::SharedPreload,
        "preload-eas" => Strategy::PreloadEas(cfg.sampling()?),
        "cobatch" => Strategy::Cobatch(cobatch_plans(cfg, g, h, model, batch_count(cfg, Some(cluster)))?),
        other => {
            return Err(Error::Input(format!(
                "unknown strategy '{other}' (expected full-graph, preload, preload-eas or cobatch)"
            )))
        }
    })
}

pub fn sim_options(cfg: &RunConfig) -> SimOptions {
    let d = SimOptions::default();
    SimOptions {
        backward_multiplier: cfg.backward_multiplier().unwrap_or(d.backward_multiplier),
        sync: cfg
            .sync_overlap()
            .map_or(SyncMode::Overlapped, |w| SyncMode::Exposed { overlap_window_s: w }),
        epoch: if cfg.first_epoch() { EpochMode::First } else { EpochMode::SteadyState },
    }
}

pub fn cmd_simulate(a: RunArgs) -> Result<()> {
    let cfg = RunConfig::new(a)?;
    let g = load_graph(&cfg)?;
    let h = load_hierarchy(&cfg, &g)?;
    let cluster = cfg.cluster()?;
    let model = cfg.model()?;
    let strat = build_strategy(cfg.strategy_name(), &cfg, &g, &h, &model, &cluster)?;
    let b = simulate_epoch(&g, &h, &cluster, &model, &strat, &sim_options(&cfg))?;
    write_output(cfg.out(), &b.to_csv())
}

pub fn cmd_validate(a: RunArgs) -> Result<()> {
    let cfg = RunConfig::new(a)?;
    let g = load_graph(&cfg)?;
    let h = load_hierarchy(&cfg, &g)?;
    let model = cfg.model()?;
    let sampling = cfg.explicit_sampling()?;
    let report = equivalence_check(&g, &h.servers, model.layers, model.hidden_dim, cfg.seed(), sampling.as_ref())?;
    if let Some(p) = cfg.out() {
        let mut text = serde_json::to_string_pretty(&report)?;
        text.push('\n');
        write_output(Some(p), &text)?;
    }
    println!("max_deviation {}", report.max_deviation);
    Ok(())
}

pub fn cmd_report(a: RunArgs) -> Result<()> {
    let cfg = RunConfig::new(a)?;
    let g = load_graph(&cfg)?;
    let h = load_hierarchy(&cfg, &g)?;
    let cluster = cfg.cluster()?;
    let model = cfg.model()?;
    let sampling = cfg.sampling()?;
    let w = WorkloadSpec::of_graph(&g);
    // Unlimited fanout is capped by the largest degree; α = log_D(D^α).
    let k = sampling.fanout.limit().min(g.stats().max_degree.max(1));
    let alpha = model.d_alpha.ln() / w.avg_degree().max(2.0).ln();

    let mut halo = Vec::new();
    for s in 0..h.num_servers() {
        let full = extract_full(&g, &h.servers, s, model.layers)?;
        let sampled = extract_sampled(&g, &h.servers, s, &sampling)?;
        halo.push(json!({
            "server": s,
            "inner": full.inner().len(),
            "full_halo": full.halo().len(),
            "sampled_halo": sampled.halo().len(),
        }));
    }

    let opts = sim_options(&cfg);
    let mut rows = Vec::new();
    let names = ["full-graph", "preload", "preload-eas", "cobatch"];
    let mut strategies = Vec::new();
    for name in names {
        match build_strategy(name, &cfg, &g, &h, &model, &cluster) {
            Ok(s) => strategies.push(s),
            Err(e) => rows.push(json!({ "strategy": name, "error": e.category(), "detail": e.to_string() })),
        }
    }
    for r in compare_strategies(&g, &h, &cluster, &model, &strategies, &opts)? {
        let a = &r.breakdown.aggregate;
        rows.push(json!({
            "strategy": r.breakdown.strategy,
            "speedup": r.speedup,
            "total_s": a.total_s,
            "compute_s": a.compute_s,
            "internal_s": a.internal_comm_s,
            "external_s": a.external_comm_s,
            "sync_s": a.grad_sync_s,
            "volumes": a.volumes,
        }));
    }

    let report = json!({
        "graph": {
            "vertices": g.num_vertices(),
            "edges": g.num_edge_pairs(),
            "undirected": g.is_undirected(),
            "stats": g.stats(),
        },
        "partition": {
            "servers": h.num_servers(),
            "gpus_per_server": h.gpus_per_server,
            "server_cut": evaluate_cut(&g, &h.servers)?,
            "gpu_cut": evaluate_cut(&g, &h.gpus)?,
        },
        "cluster": cluster,
        "model": model,
        "sampling": sampling,
        "analytic": {
            "t_prev": t_prev(&w, &cluster),
            "t_preload": t_preload(&w, &cluster, &model),
            "t_sampling": t_sampling(&w, &cluster, sampling.max_hop, k, alpha),
            "speedup_threshold": speedup_threshold(w.avg_degree(), model.d_alpha, model.layers),
            "preload_predicted_faster": preload_predicted_faster(&w, &cluster, &model),
            "crossover_layer": crossover_layer(&w, &cluster, model.d_alpha),
            "validity": check_validity(&cluster, &model, Some((sampling.max_hop, k, alpha))),
        },
        "halo": halo,
        "strategies": rows,
    });
    let mut text = serde_json::to_string_pretty(&report)?;
    text.push('\n');
    write_output(cfg.out(), &text)
}
