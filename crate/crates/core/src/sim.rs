//! Per-epoch timeline simulation of distributed full-graph training.
//!
//! Layers are bulk-synchronous: every GPU finishes fetching layer-`l` states
//! before any GPU computes layer `l + 1`. Volumes are counted in
//! vertex-vectors and charged to the receiving GPU; a vertex's layer-`l`
//! vector reaches a given GPU at most once per layer. Rates in
//! [`ClusterSpec`] are effective vertex-vector rates, so any hidden-width
//! scaling is folded into them.
//!
//! Every strategy reduces to one or more *regions*: a vertex set with a
//! depth per vertex (the deepest layer whose state it holds). Vertices of the
//! region's server run on their own GPU; any other vertex runs on the GPU of
//! its lowest-id dependent one layer deeper.

use std::collections::{HashMap, HashSet, VecDeque};
use std::fmt::Write as _;

use serde::Serialize;

use crate::batch::{peel_within, BatchPlan, BatchStrategy};
use crate::cost::{ClusterSpec, ModelSpec};
use crate::error::{Error, Result};
use crate::extract::{extract_full, extract_sampled, SamplingConfig};
use crate::graph::{Graph, VertexId};
use crate::partition::HierarchicalPartition;

const ABSENT: u32 = u32::MAX;

#[derive(Debug, Clone, PartialEq)]
pub enum Strategy {
    FullGraph,
    SharedPreload,
    PreloadEas(SamplingConfig),
    /// One fetch-then-split plan per server, indexed by server id.
    Cobatch(Vec<BatchPlan>),
}

impl Strategy {
    pub fn name(&self) -> &'static str {
        match self {
            Strategy::FullGraph => "full-graph",
            Strategy::SharedPreload => "preload",
            Strategy::PreloadEas(_) => "preload-eas",
            Strategy::Cobatch(_) => "cobatch",
        }
    }

    fn steps(&self) -> usize {
        match self {
            Strategy::Cobatch(plans) => plans.iter().map(BatchPlan::r).max().unwrap_or(1),
            _ => 1,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(rename_all = "snake_case", tag = "mode")]
pub enum SyncMode {
    /// Gradient all-reduce hides entirely behind backward compute.
    Overlapped,
    /// Only `overlap_window_s` per step is hidden.
    Exposed { overlap_window_s: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum EpochMode {
    /// Preloaded features are already resident.
    SteadyState,
    /// Preloaded features are fetched over the external link during the epoch.
    First,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SimOptions {
    /// Scales forward compute and per-layer fetches to cover backward;
    /// batch input loads and feature preloads are not mirrored.
    pub backward_multiplier: f64,
    pub sync: SyncMode,
    pub epoch: EpochMode,
}

impl Default for SimOptions {
    fn default() -> Self {
        SimOptions {
            backward_multiplier: 2.0,
            sync: SyncMode::Overlapped,
            epoch: EpochMode::SteadyState,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
pub struct Volumes {
    /// Vertex-layer computations.
    pub computed: u64,
    pub internal_vertices_moved: u64,
    pub external_vertices_moved: u64,
    pub features_preloaded: u64,
    /// Host-to-GPU batch input loads; already included in
    /// `internal_vertices_moved`.
    pub inputs_loaded: u64,
}

impl Volumes {
    fn add(&mut self, o: &Volumes) {
        self.computed += o.computed;
        self.internal_vertices_moved += o.internal_vertices_moved;
        self.external_vertices_moved += o.external_vertices_moved;
        self.features_preloaded += o.features_preloaded;
        self.inputs_loaded += o.inputs_loaded;
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct WorkerCost {
    pub server: usize,
    /// Global GPU id.
    pub gpu: usize,
    pub compute_s: f64,
    pub internal_comm_s: f64,
    pub external_comm_s: f64,
    pub grad_sync_s: f64,
    pub total_s: f64,
    pub volumes: Volumes,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AggregateCost {
    /// GPU whose total sets the step time.
    pub critical_gpu: usize,
    pub compute_s: f64,
    pub internal_comm_s: f64,
    pub external_comm_s: f64,
    pub grad_sync_s: f64,
    pub total_s: f64,
    /// Sums over workers.
    pub volumes: Volumes,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CostBreakdown {
    pub strategy: String,
    pub workers: Vec<WorkerCost>,
    pub aggregate: AggregateCost,
}

pub const CSV_HEADER: &str = "strategy,server,gpu,compute_s,internal_s,external_s,sync_s,total_s";

impl CostBreakdown {
    pub fn total_s(&self) -> f64 {
        self.aggregate.total_s
    }

    /// Rows without the header: one per GPU, then `ALL`.
    pub fn csv_rows(&self) -> String {
        let mut out = String::new();
        for w in &self.workers {
            let _ = writeln!(
                out,
                "{},{},{},{},{},{},{},{}",
                self.strategy, w.server, w.gpu, w.compute_s, w.internal_comm_s, w.external_comm_s, w.grad_sync_s, w.total_s
            );
        }
        let a = &self.aggregate;
        let _ = writeln!(
            out,
            "{},ALL,ALL,{},{},{},{},{}",
            self.strategy, a.compute_s, a.internal_comm_s, a.external_comm_s, a.grad_sync_s, a.total_s
        );
        out
    }

    pub fn to_csv(&self) -> String {
        format!("{CSV_HEADER}\n{}", self.csv_rows())
    }
}

fn check_inputs(g: &Graph, h: &HierarchicalPartition, c: &ClusterSpec, m: &ModelSpec) -> Result<()> {
    c.validate()?;
    m.validate()?;
    h.servers.check_shape(g)?;
    h.gpus.check_shape(g)?;
    if h.num_servers() != c.num_servers || h.gpus_per_server != c.gpus_per_server {
        return Err(Error::input(format!(
            "partition has {} servers x {} GPUs but cluster has {} x {}",
            h.num_servers(),
            h.gpus_per_server,
            c.num_servers,
            c.gpus_per_server
        )));
    }
    if h.gpus.num_parts() != c.workers() || !h.is_refinement() {
        return Err(Error::input("GPU partition does not refine the server partition"));
    }
    Ok(())
}

fn check_plans(plans: &[BatchPlan], h: &HierarchicalPartition, layers: usize) -> Result<()> {
    if plans.len() != h.num_servers() {
        return Err(Error::input(format!(
            "cobatch needs one plan per server: got {} for {} servers",
            plans.len(),
            h.num_servers()
        )));
    }
    for (s, plan) in plans.iter().enumerate() {
        if plan.owner != s || plan.strategy != BatchStrategy::FetchThenSplit || plan.layers != layers {
            return Err(Error::input(format!(
                "plan {s} is not a {layers}-layer fetch-then-split plan for server {s}"
            )));
        }
        let mut targets: Vec<VertexId> = plan.batches.iter().flat_map(|b| b.target_vertices.iter().copied()).collect();
        targets.sort_unstable();
        if targets != h.servers.members(s) {
            return Err(Error::input(format!("plan {s} targets do not cover server {s} exactly")));
        }
        for b in &plan.batches {
            if b.depths.iter().any(|&(v, d)| v as usize >= h.servers.num_vertices() || d as usize > layers) {
                return Err(Error::input(format!("plan {s} has a malformed batch")));
            }
        }
    }
    Ok(())
}

/// A server-scoped (or global) vertex set with per-vertex depth.
struct RegionSpec {
    server: Option<usize>,
    depths: Vec<(VertexId, u32)>,
    /// Charge every region vertex as a host-to-GPU load.
    load_inputs: bool,
}

/// Builds every region a strategy evaluates, in deterministic order.
fn regions(g: &Graph, h: &HierarchicalPartition, layers: usize, strat: &Strategy) -> Result<Vec<RegionSpec>> {
    let n = g.num_vertices();
    let mut scratch = Vec::new();
    let server_region = |sub: crate::extract::DependencySubgraph, scratch: &mut Vec<u32>| {
        let mut member = vec![false; n];
        for v in sub.vertices() {
            member[v as usize] = true;
        }
        RegionSpec {
            server: Some(sub.server_id),
            depths: peel_within(g, sub.inner(), &member, layers, scratch),
            load_inputs: false,
        }
    };
    Ok(match strat {
        Strategy::FullGraph => vec![RegionSpec {
            server: None,
            depths: g.vertices().map(|v| (v, layers as u32)).collect(),
            load_inputs: false,
        }],
        Strategy::SharedPreload => (0..h.num_servers())
            .map(|s| Ok(server_region(extract_full(g, &h.servers, s, layers)?, &mut scratch)))
            .collect::<Result<_>>()?,
        Strategy::PreloadEas(cfg) => (0..h.num_servers())
            .map(|s| Ok(server_region(extract_sampled(g, &h.servers, s, cfg)?, &mut scratch)))
            .collect::<Result<_>>()?,
        Strategy::Cobatch(plans) => {
            check_plans(plans, h, layers)?;
            plans
                .iter()
                .flat_map(|p| {
                    let load_inputs = p.r() > 1;
                    p.batches.iter().map(move |b| RegionSpec {
                        server: Some(p.owner),
                        depths: b.depths.clone(),
                        load_inputs,
                    })
                })
                .collect()
        }
    })
}

struct Engine<'a> {
    g: &'a Graph,
    h: &'a HierarchicalPartition,
    layers: usize,
    workers: usize,
    depth: Vec<u32>,
    owner: Vec<u32>,
    /// `marks[u * workers + gpu]` holds the generation of the last delivery.
    marks: Vec<u32>,
    generation: u32,
    /// Non-server vertices already preloaded, per server.
    preloaded: Vec<HashSet<VertexId>>,
    vol: Vec<Volumes>,
}

impl<'a> Engine<'a> {
    fn new(g: &'a Graph, h: &'a HierarchicalPartition, layers: usize) -> Self {
        let n = g.num_vertices();
        let workers = h.gpus.num_parts();
        Engine {
            g,
            h,
            layers,
            workers,
            depth: vec![ABSENT; n],
            owner: vec![ABSENT; n],
            marks: vec![0; n * workers],
            generation: 0,
            preloaded: vec![HashSet::new(); h.num_servers()],
            vol: vec![Volumes::default(); workers],
        }
    }

    fn run(&mut self, r: &RegionSpec) {
        let g = self.g;
        let mut order = r.depths.clone();
        order.sort_unstable_by_key(|&(v, d)| (std::cmp::Reverse(d), v));
        for &(v, d) in &order {
            self.depth[v as usize] = d;
            let home = r.server.is_none_or(|s| self.h.servers.part_of(v) == s);
            if home {
                self.owner[v as usize] = self.h.gpus.part_of(v) as u32;
            }
        }
        for &(w, d) in &order {
            let o = self.owner[w as usize];
            debug_assert_ne!(o, ABSENT, "vertex {w} has no dependent in its region");
            for &u in g.neighbors(w) {
                let du = self.depth[u as usize];
                if du != ABSENT && du < d && self.owner[u as usize] == ABSENT {
                    self.owner[u as usize] = o;
                }
            }
        }
        if let Some(s) = r.server {
            for &(v, _) in &order {
                let a = self.owner[v as usize] as usize;
                if self.h.servers.part_of(v) != s && self.preloaded[s].insert(v) {
                    self.vol[a].features_preloaded += 1;
                }
                if r.load_inputs {
                    self.vol[a].internal_vertices_moved += 1;
                    self.vol[a].inputs_loaded += 1;
                }
            }
        }
        for l in 0..self.layers as u32 {
            self.generation += 1;
            let generation = self.generation;
            for &(v, d) in &order {
                if d <= l {
                    // Sorted by depth, so nothing later computes this layer.
                    break;
                }
                let a = self.owner[v as usize];
                let av = &mut self.vol[a as usize];
                av.computed += 1;
                for &u in g.neighbors(v) {
                    let du = self.depth[u as usize];
                    if du == ABSENT || du < l {
                        continue;
                    }
                    let b = self.owner[u as usize];
                    if b == a {
                        continue;
                    }
                    let slot = &mut self.marks[u as usize * self.workers + a as usize];
                    if *slot == generation {
                        continue;
                    }
                    *slot = generation;
                    if self.h.server_of_gpu(b as usize) == self.h.server_of_gpu(a as usize) {
                        self.vol[a as usize].internal_vertices_moved += 1;
                    } else {
                        self.vol[a as usize].external_vertices_moved += 1;
                    }
                }
            }
        }
        for &(v, _) in &order {
            self.depth[v as usize] = ABSENT;
            self.owner[v as usize] = ABSENT;
        }
    }
}

/// Forward volume of one gradient all-reduce in vertex-vectors per GPU.
pub fn grad_sync_volume(m: &ModelSpec, workers: usize) -> f64 {
    if workers <= 1 {
        return 0.0;
    }
    let params: usize = (1..=m.layers).map(|l| m.width(l - 1) * m.hidden_dim).sum();
    let vectors = params as f64 / m.hidden_dim as f64;
    2.0 * (workers as f64 - 1.0) / workers as f64 * vectors
}

fn price(
    vols: &[Volumes],
    h: &HierarchicalPartition,
    c: &ClusterSpec,
    m: &ModelSpec,
    strat: &Strategy,
    opts: &SimOptions,
) -> CostBreakdown {
    let mult = opts.backward_multiplier;
    let sync_rate = if c.num_servers > 1 { c.external_bw_vps } else { c.internal_bw_vps };
    let per_step = grad_sync_volume(m, c.workers()) / sync_rate;
    let sync_s = match opts.sync {
        SyncMode::Overlapped => 0.0,
        SyncMode::Exposed { overlap_window_s } => strat.steps() as f64 * (per_step - overlap_window_s).max(0.0),
    };
    let loads_external = opts.epoch == EpochMode::First;
    let workers: Vec<WorkerCost> = vols
        .iter()
        .enumerate()
        .map(|(gpu, v)| {
            let compute_s = mult * v.computed as f64 / c.compute_vps;
            let fetched = (v.internal_vertices_moved - v.inputs_loaded) as f64;
            let internal_comm_s = (mult * fetched + v.inputs_loaded as f64) / c.internal_bw_vps;
            let mut external_comm_s = mult * v.external_vertices_moved as f64 / c.external_bw_vps;
            if loads_external {
                external_comm_s += v.features_preloaded as f64 / c.external_bw_vps;
            }
            WorkerCost {
                server: h.server_of_gpu(gpu),
                gpu,
                compute_s,
                internal_comm_s,
                external_comm_s,
                grad_sync_s: sync_s,
                total_s: compute_s + internal_comm_s + external_comm_s + sync_s,
                volumes: *v,
            }
        })
        .collect();
    let critical = workers
        .iter()
        .fold(&workers[0], |best, w| if w.total_s > best.total_s { w } else { best });
    let mut volumes = Volumes::default();
    for w in &workers {
        volumes.add(&w.volumes);
    }
    let aggregate = AggregateCost {
        critical_gpu: critical.gpu,
        compute_s: critical.compute_s,
        internal_comm_s: critical.internal_comm_s,
        external_comm_s: critical.external_comm_s,
        grad_sync_s: critical.grad_sync_s,
        total_s: critical.total_s,
        volumes,
    };
    CostBreakdown {
        strategy: strat.name().to_string(),
        workers,
        aggregate,
    }
}

pub fn simulate_epoch(
    g: &Graph,
    h: &HierarchicalPartition,
    c: &ClusterSpec,
    m: &ModelSpec,
    strat: &Strategy,
    opts: &SimOptions,
) -> Result<CostBreakdown> {
    check_inputs(g, h, c, m)?;
    if !(opts.backward_multiplier >= 1.0) {
        return Err(Error::input("backward_multiplier must be >= 1"));
    }
    let mut engine = Engine::new(g, h, m.layers);
    for r in regions(g, h, m.layers, strat)? {
        engine.run(&r);
    }
    Ok(price(&engine.vol, h, c, m, strat, opts))
}

#[derive(Debug, Clone, Serialize)]
pub struct ComparisonRow {
    pub breakdown: CostBreakdown,
    /// First entry's total divided by this entry's total.
    pub speedup: f64,
}

pub fn compare_strategies(
    g: &Graph,
    h: &HierarchicalPartition,
    c: &ClusterSpec,
    m: &ModelSpec,
    strategies: &[Strategy],
    opts: &SimOptions,
) -> Result<Vec<ComparisonRow>> {
    let runs = strategies
        .iter()
        .map(|s| simulate_epoch(g, h, c, m, s, opts))
        .collect::<Result<Vec<_>>>()?;
    let base = runs.first().map(CostBreakdown::total_s).unwrap_or(0.0);
    Ok(runs
        .into_iter()
        .map(|b| ComparisonRow {
            speedup: base / b.total_s(),
            breakdown: b,
        })
        .collect())
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct AuditReport {
    /// Recounted per-GPU volumes (compute counts excluded).
    pub workers: Vec<Volumes>,
}

/// Recounts every worker's moved and preloaded vertices from a plain edge
/// scan and fails on any difference from `b`.
pub fn volume_audit(
    b: &CostBreakdown,
    g: &Graph,
    h: &HierarchicalPartition,
    m: &ModelSpec,
    strat: &Strategy,
) -> Result<AuditReport> {
    if b.strategy != strat.name() || b.workers.len() != h.gpus.num_parts() {
        return Err(Error::Consistency("breakdown does not belong to this strategy".into()));
    }
    let layers = m.layers as u32;
    let n = g.num_vertices();
    let mut counts = vec![Volumes::default(); h.gpus.num_parts()];
    let mut preloaded: Vec<HashSet<VertexId>> = vec![HashSet::new(); h.num_servers()];
    for spec in audit_regions(g, h, m.layers, strat)? {
        let depth: HashMap<VertexId, u32> = spec.depths.iter().copied().collect();
        let home = |v: VertexId| spec.server.is_none_or(|s| h.servers.part_of(v) == s);
        // Each non-home vertex hangs off its lowest-id dependent one layer deeper.
        let mut parent: HashMap<VertexId, VertexId> = HashMap::new();
        for (w, u) in g.edges() {
            if let (Some(&dw), Some(&du)) = (depth.get(&w), depth.get(&u)) {
                if !home(u) && dw == du + 1 {
                    let p = parent.entry(u).or_insert(w);
                    *p = (*p).min(w);
                }
            }
        }
        let owner_of = |mut v: VertexId| -> u32 {
            for _ in 0..=n {
                if home(v) {
                    return h.gpus.part_of(v) as u32;
                }
                v = parent[&v];
            }
            unreachable!("parent chain must reach the home server")
        };
        let owner: HashMap<VertexId, u32> = depth.keys().map(|&v| (v, owner_of(v))).collect();
        if let Some(s) = spec.server {
            let mut vs: Vec<_> = depth.keys().copied().collect();
            vs.sort_unstable();
            for v in vs {
                let a = owner[&v] as usize;
                if !home(v) && preloaded[s].insert(v) {
                    counts[a].features_preloaded += 1;
                }
                if spec.load_inputs {
                    counts[a].internal_vertices_moved += 1;
                    counts[a].inputs_loaded += 1;
                }
            }
        }
        let mut events: HashSet<(VertexId, u32, u32)> = HashSet::new();
        for l in 0..layers {
            for (v, u) in g.edges() {
                let (Some(&dv), Some(&du)) = (depth.get(&v), depth.get(&u)) else {
                    continue;
                };
                if dv > l && du >= l && owner[&v] != owner[&u] {
                    events.insert((u, owner[&v], l));
                }
            }
        }
        for (u, a, _) in events {
            let same = h.server_of_gpu(a as usize) == h.server_of_gpu(owner[&u] as usize);
            let c = &mut counts[a as usize];
            if same {
                c.internal_vertices_moved += 1;
            } else {
                c.external_vertices_moved += 1;
            }
        }
    }
    for (gpu, (w, c)) in b.workers.iter().zip(&counts).enumerate() {
        let v = &w.volumes;
        if (v.internal_vertices_moved, v.external_vertices_moved, v.features_preloaded, v.inputs_loaded)
            != (c.internal_vertices_moved, c.external_vertices_moved, c.features_preloaded, c.inputs_loaded)
        {
            return Err(Error::Consistency(format!(
                "gpu {gpu}: simulated volumes ({}, {}, {}) but audit counts ({}, {}, {})",
                v.internal_vertices_moved,
                v.external_vertices_moved,
                v.features_preloaded,
                c.internal_vertices_moved,
                c.external_vertices_moved,
                c.features_preloaded
            )));
        }
    }
    Ok(AuditReport { workers: counts })
}

/// Region construction for the audit: breadth-first distances over the
/// extracted vertex set instead of the planner's peeling.
fn audit_regions(g: &Graph, h: &HierarchicalPartition, layers: usize, strat: &Strategy) -> Result<Vec<RegionSpec>> {
    let bfs = |sub: crate::extract::DependencySubgraph| {
        let members: HashSet<VertexId> = sub.vertices().into_iter().collect();
        let mut dist: HashMap<VertexId, u32> = sub.inner().iter().map(|&v| (v, 0)).collect();
        let mut queue: VecDeque<VertexId> = sub.inner().iter().copied().collect();
        while let Some(v) = queue.pop_front() {
            let d = dist[&v];
            if d as usize == layers {
                continue;
            }
            for &u in g.neighbors(v) {
                if members.contains(&u) && !dist.contains_key(&u) {
                    dist.insert(u, d + 1);
                    queue.push_back(u);
                }
            }
        }
        RegionSpec {
            server: Some(sub.server_id),
            depths: dist.into_iter().map(|(v, d)| (v, layers as u32 - d)).collect(),
            load_inputs: false,
        }
    };
    match strat {
        Strategy::SharedPreload => (0..h.num_servers())
            .map(|s| Ok(bfs(extract_full(g, &h.servers, s, layers)?)))
            .collect(),
        Strategy::PreloadEas(cfg) => (0..h.num_servers())
            .map(|s| Ok(bfs(extract_sampled(g, &h.servers, s, cfg)?)))
            .collect(),
        _ => regions(g, h, layers, strat),
    }
}
