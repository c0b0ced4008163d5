//! Batch planning under a memory budget.
//!
//! Cooperative batching (fetch-then-split) splits a server's inner vertices
//! into `R` target groups and draws every group's dependencies from the
//! already-extracted server subgraph. The baseline (split-then-fetch) splits
//! one GPU's vertices first and fetches each chunk's dependencies from the
//! whole graph with layer-wise fanout sampling.

use serde::Serialize;

use crate::cost::ModelSpec;
use crate::error::{Error, Result};
use crate::extract::{full_halo, sampled_halo, DependencySubgraph, Fanout, Region, SamplingConfig};
use crate::graph::{Graph, VertexId};
use crate::partition::{partition_mincut, Partition, DEFAULT_EPSILON};
use crate::rng::{derive_seed, domain, keyed_shuffle};

pub const BYTES_PER_SCALAR: u64 = 4;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum BatchStrategy {
    FetchThenSplit,
    SplitThenFetch,
}

/// Targets of one batch and the message-flow graph needed to compute them.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Batch {
    pub target_vertices: Vec<VertexId>,
    /// Entry `l` counts vertices whose layer-`l` state is needed; entry 0 is
    /// the input set, entry `L` the targets.
    pub mfg_vertices_per_layer: Vec<usize>,
    pub est_memory_bytes: u64,
    /// `(vertex, deepest layer)` for every vertex of the input set, ascending.
    #[serde(skip)]
    pub depths: Vec<(VertexId, u32)>,
}

impl Batch {
    fn from_depths(targets: Vec<VertexId>, mut depths: Vec<(VertexId, u32)>, layers: usize, model: &ModelSpec) -> Self {
        depths.sort_unstable();
        let mut mfg = vec![0usize; layers + 1];
        for &(_, d) in &depths {
            for slot in &mut mfg[..=d as usize] {
                *slot += 1;
            }
        }
        let mut batch = Batch {
            target_vertices: targets,
            mfg_vertices_per_layer: mfg,
            est_memory_bytes: 0,
            depths,
        };
        batch.est_memory_bytes = estimate_batch_memory(&batch, model);
        batch
    }

    pub fn layers(&self) -> usize {
        self.mfg_vertices_per_layer.len().saturating_sub(1)
    }

    /// Vertices whose layer-`layer` state the batch computes or loads.
    pub fn layer_set(&self, layer: usize) -> impl Iterator<Item = VertexId> + '_ {
        self.depths
            .iter()
            .filter(move |&&(_, d)| d as usize >= layer)
            .map(|&(v, _)| v)
    }

    pub fn input_vertices(&self) -> impl Iterator<Item = VertexId> + '_ {
        self.depths.iter().map(|&(v, _)| v)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct BatchPlan {
    /// Server id for cooperative plans, GPU id for split-then-fetch plans.
    pub owner: usize,
    pub strategy: BatchStrategy,
    pub layers: usize,
    pub batches: Vec<Batch>,
}

impl BatchPlan {
    pub fn r(&self) -> usize {
        self.batches.len()
    }

    pub fn total_memory_bytes(&self) -> u64 {
        self.batches.iter().map(|b| b.est_memory_bytes).sum()
    }

    pub fn max_memory_bytes(&self) -> u64 {
        self.batches.iter().map(|b| b.est_memory_bytes).max().unwrap_or(0)
    }

    /// Σ over batches of the layer-0 (input) counts.
    pub fn input_vertex_total(&self) -> usize {
        self.batches.iter().map(|b| b.mfg_vertices_per_layer[0]).sum()
    }

    pub fn summary(&self) -> PlanSummary {
        PlanSummary {
            owner: self.owner,
            strategy: self.strategy,
            r: self.r(),
            batches: self
                .batches
                .iter()
                .map(|b| BatchSummary {
                    targets: b.target_vertices.len(),
                    mfg_vertices_per_layer: b.mfg_vertices_per_layer.clone(),
                    est_memory_bytes: b.est_memory_bytes,
                })
                .collect(),
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct PlanSummary {
    pub owner: usize,
    pub strategy: BatchStrategy,
    pub r: usize,
    pub batches: Vec<BatchSummary>,
}

#[derive(Debug, Clone, Serialize)]
pub struct BatchSummary {
    pub targets: usize,
    pub mfg_vertices_per_layer: Vec<usize>,
    pub est_memory_bytes: u64,
}

/// Activations plus input features:
/// `Σ_l mfg[l] · width(l) · BYTES_PER_SCALAR`.
pub fn estimate_batch_memory(b: &Batch, model: &ModelSpec) -> u64 {
    b.mfg_vertices_per_layer
        .iter()
        .enumerate()
        .map(|(l, &count)| count as u64 * model.width(l) as u64 * BYTES_PER_SCALAR)
        .sum()
}

/// Backward peeling from `targets` inside `member`: a vertex at distance `d`
/// from the targets is needed down to layer `layers - d`.
pub(crate) fn peel_within(g: &Graph, targets: &[VertexId], member: &[bool], layers: usize, scratch: &mut Vec<u32>) -> Vec<(VertexId, u32)> {
    scratch.clear();
    scratch.resize(g.num_vertices(), u32::MAX);
    let mut depths: Vec<(VertexId, u32)> = targets.iter().map(|&t| (t, layers as u32)).collect();
    for &t in targets {
        scratch[t as usize] = layers as u32;
    }
    let mut frontier: Vec<VertexId> = targets.to_vec();
    for depth in (0..layers as u32).rev() {
        let mut next = Vec::new();
        for &v in &frontier {
            for &u in g.neighbors(v) {
                if member[u as usize] && scratch[u as usize] == u32::MAX {
                    scratch[u as usize] = depth;
                    next.push(u);
                    depths.push((u, depth));
                }
            }
        }
        if next.is_empty() {
            break;
        }
        frontier = next;
    }
    depths
}

/// Splits targets into `r` groups via min-cut over the induced subgraph.
fn split_targets(g: &Graph, targets: &[VertexId], r: usize, seed: u64) -> Result<Vec<Vec<VertexId>>> {
    if r == 1 {
        return Ok(vec![targets.to_vec()]);
    }
    let sub = g.induced(targets);
    let p = partition_mincut(&sub, r, seed, DEFAULT_EPSILON)?;
    Ok(p.all_members()
        .into_iter()
        .map(|local| local.into_iter().map(|i| targets[i as usize]).collect())
        .collect())
}

struct CobatchBuilder<'a> {
    g: &'a Graph,
    universe: Vec<bool>,
    layers: usize,
    cfg: &'a SamplingConfig,
    model: &'a ModelSpec,
    inner_mask: Vec<bool>,
    scratch: Vec<u32>,
    member: Vec<bool>,
}

impl CobatchBuilder<'_> {
    fn build(&mut self, targets: Vec<VertexId>) -> Batch {
        for &t in &targets {
            self.inner_mask[t as usize] = true;
        }
        let region = Region {
            inner: &self.inner_mask,
            allowed: Some(&self.universe),
        };
        let halo = if self.cfg.is_exhaustive_for(self.layers) {
            full_halo(self.g, &targets, &region, self.layers)
        } else {
            sampled_halo(self.g, &targets, &region, self.cfg, None)
        };
        for &t in &targets {
            self.member[t as usize] = true;
        }
        for &(v, _) in &halo {
            self.member[v as usize] = true;
        }
        let depths = peel_within(self.g, &targets, &self.member, self.layers, &mut self.scratch);
        for &t in &targets {
            self.inner_mask[t as usize] = false;
            self.member[t as usize] = false;
        }
        for &(v, _) in &halo {
            self.member[v as usize] = false;
        }
        Batch::from_depths(targets, depths, self.layers, self.model)
    }
}

/// Search policy for the batch count.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BatchCount {
    /// Smallest `R` whose batches all fit the budget.
    Budget(u64),
    Fixed(usize),
}

/// Fetch-then-split plan for one server.
///
/// Each group's dependencies come from `sub`: targets keep all their mutual
/// dependencies, and dependencies outside the group are drawn with `cfg`
/// (the exhaustive config keeps the exact closure).
pub fn plan_cobatch(
    sub: &DependencySubgraph,
    g: &Graph,
    layers: usize,
    cfg: &SamplingConfig,
    count: BatchCount,
    model: &ModelSpec,
) -> Result<BatchPlan> {
    let inner = sub.inner();
    let mut universe = vec![false; g.num_vertices()];
    for v in sub.vertices() {
        universe[v as usize] = true;
    }
    let mut builder = CobatchBuilder {
        g,
        universe,
        layers,
        cfg,
        model,
        inner_mask: vec![false; g.num_vertices()],
        scratch: Vec::new(),
        member: vec![false; g.num_vertices()],
    };
    let seed = cfg.seed;
    let make = |r: usize, builder: &mut CobatchBuilder<'_>| -> Result<BatchPlan> {
        let groups = split_targets(g, inner, r, seed)?;
        Ok(BatchPlan {
            owner: sub.server_id,
            strategy: BatchStrategy::FetchThenSplit,
            layers,
            batches: groups.into_iter().map(|t| builder.build(t)).collect(),
        })
    };
    search(inner.len(), target_floor(model, layers), count, |r| make(r, &mut builder))
}

/// Layer-wise fanout sampling: a vertex at layer `l` keeps the first
/// `fanout` neighbors of a permutation keyed on `(seed, layer, vertex)`.
fn peel_sampled(g: &Graph, targets: &[VertexId], layers: usize, fanout: Fanout, seed: u64, scratch: &mut Vec<u32>) -> Vec<(VertexId, u32)> {
    scratch.clear();
    scratch.resize(g.num_vertices(), u32::MAX);
    let mut depths: Vec<(VertexId, u32)> = targets.iter().map(|&t| (t, layers as u32)).collect();
    for &t in targets {
        scratch[t as usize] = layers as u32;
    }
    let k = fanout.limit();
    // Every vertex present at layer l (not just the new ones) samples anew.
    let mut current: Vec<VertexId> = targets.to_vec();
    let mut ranked = Vec::new();
    for depth in (0..layers as u32).rev() {
        let mut added = Vec::new();
        for &v in &current {
            ranked.clear();
            ranked.extend_from_slice(g.neighbors(v));
            if k < ranked.len() {
                keyed_shuffle(&mut ranked, seed, (u64::from(depth) << 32) | u64::from(v));
                ranked.truncate(k);
            }
            for &u in &ranked {
                if scratch[u as usize] == u32::MAX {
                    scratch[u as usize] = depth;
                    added.push(u);
                    depths.push((u, depth));
                }
            }
        }
        current.extend(added);
    }
    depths
}

/// Split-then-fetch plan for one GPU: contiguous chunks of the GPU's
/// vertices, each fetching its own dependencies from the whole graph.
#[allow(clippy::too_many_arguments)]
pub fn plan_minibatch_baseline(
    g: &Graph,
    gpu_partition: &Partition,
    gpu_id: usize,
    layers: usize,
    fanout: Fanout,
    seed: u64,
    count: BatchCount,
    model: &ModelSpec,
) -> Result<BatchPlan> {
    gpu_partition.check_shape(g)?;
    if gpu_id >= gpu_partition.num_parts() {
        return Err(Error::input(format!("gpu {gpu_id} out of range")));
    }
    let targets = gpu_partition.members(gpu_id);
    let seed = derive_seed(seed, domain::LAYER_FANOUT);
    let mut scratch = Vec::new();
    search(targets.len(), target_floor(model, layers), count, |r| {
        let batches = chunk(&targets, r)
            .map(|c| {
                let depths = peel_sampled(g, c, layers, fanout, seed, &mut scratch);
                Batch::from_depths(c.to_vec(), depths, layers, model)
            })
            .collect();
        Ok(BatchPlan {
            owner: gpu_id,
            strategy: BatchStrategy::SplitThenFetch,
            layers,
            batches,
        })
    })
}

fn chunk(items: &[VertexId], r: usize) -> impl Iterator<Item = &[VertexId]> {
    let (base, extra) = (items.len() / r, items.len() % r);
    let mut start = 0;
    (0..r).map(move |i| {
        let len = base + usize::from(i < extra);
        let c = &items[start..start + len];
        start += len;
        c
    })
}

/// Bytes every target costs on its own: it is present at all layers.
fn target_floor(model: &ModelSpec, layers: usize) -> u64 {
    (0..=layers).map(|l| model.width(l) as u64 * BYTES_PER_SCALAR).sum()
}

/// Linear scan over `R = 1, 2, …, max(1, targets)`; every `R` is rebuilt from
/// scratch because the largest batch need not shrink monotonically in `R`.
/// An `R` whose largest group (at least `ceil(targets / R)` targets) already
/// exceeds the budget on targets alone is skipped without building.
fn search(
    targets: usize,
    floor_per_target: u64,
    count: BatchCount,
    mut make: impl FnMut(usize) -> Result<BatchPlan>,
) -> Result<BatchPlan> {
    let budget = match count {
        BatchCount::Fixed(r) => {
            if r == 0 || r > targets.max(1) {
                return Err(Error::input(format!("cannot form {r} batches from {targets} targets")));
            }
            return make(r);
        }
        BatchCount::Budget(b) => b,
    };
    if budget == 0 {
        return Err(Error::input("memory budget must be > 0"));
    }
    let cap = targets.max(1);
    let mut last = None;
    for r in 1..=cap {
        if r < cap && (targets.div_ceil(r) as u64).saturating_mul(floor_per_target) > budget {
            continue;
        }
        let plan = make(r)?;
        if plan.max_memory_bytes() <= budget {
            return Ok(plan);
        }
        last = Some(plan);
    }
    let plan = last.expect("cap >= 1");
    let worst = plan
        .batches
        .iter()
        .max_by_key(|b| (b.est_memory_bytes, std::cmp::Reverse(b.target_vertices.first().copied())))
        .expect("non-empty plan");
    Err(Error::Capacity {
        vertex: worst.target_vertices.first().copied().unwrap_or(0),
        required_bytes: worst.est_memory_bytes,
        budget_bytes: budget,
    })
}
