//! Server-level dependency subgraphs.
//!
//! `extract_full` preloads the complete `L`-hop closure of a server's inner
//! vertices. `extract_sampled` grows the halo hop by hop from the inner
//! boundary, letting each frontier vertex pull in at most `k` external
//! neighbors. Inner-to-inner dependencies are never sampled.

use std::fmt;
use std::fmt::Write as _;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{Graph, VertexId};
use crate::partition::Partition;
use crate::rng::{derive_seed, domain, keyed_shuffle};

/// External fanout: how many external neighbors a frontier vertex may add.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Fanout {
    Limited(usize),
    Unlimited,
}

impl Fanout {
    pub fn limit(self) -> usize {
        match self {
            Fanout::Limited(k) => k,
            Fanout::Unlimited => usize::MAX,
        }
    }
}

impl fmt::Display for Fanout {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Fanout::Limited(k) => write!(f, "{k}"),
            Fanout::Unlimited => f.write_str("unlimited"),
        }
    }
}

impl FromStr for Fanout {
    type Err = Error;

    /// Accepts a count or `unlimited`.
    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "unlimited" | "inf" => Ok(Fanout::Unlimited),
            t => t
                .parse()
                .map(Fanout::Limited)
                .map_err(|_| Error::input(format!("fanout must be a count or 'unlimited', got '{t}'"))),
        }
    }
}

/// External max-hop `m` and fanout `k` of boundary-aware sampling.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SamplingConfig {
    pub max_hop: usize,
    pub fanout: Fanout,
    pub seed: u64,
}

impl Default for SamplingConfig {
    fn default() -> Self {
        SamplingConfig {
            max_hop: 1,
            fanout: Fanout::Limited(15),
            seed: 0,
        }
    }
}

impl SamplingConfig {
    pub fn new(max_hop: usize, fanout: Fanout, seed: u64) -> Self {
        SamplingConfig { max_hop, fanout, seed }
    }

    /// The configuration that reproduces the full `hops`-hop closure.
    pub fn exhaustive(hops: usize) -> Self {
        SamplingConfig {
            max_hop: hops,
            fanout: Fanout::Unlimited,
            seed: 0,
        }
    }

    pub fn is_exhaustive_for(&self, hops: usize) -> bool {
        self.max_hop >= hops && self.fanout == Fanout::Unlimited
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Extraction {
    Full,
    Sampled(SamplingConfig),
}

/// A server's inner vertices plus the halo preloaded to satisfy them.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DependencySubgraph {
    pub server_id: usize,
    inner: Vec<VertexId>,
    halo: Vec<VertexId>,
    halo_hops: Vec<u32>,
    induced_edges: usize,
    hop_limit: usize,
    extraction: Extraction,
}

impl DependencySubgraph {
    pub fn inner(&self) -> &[VertexId] {
        &self.inner
    }

    pub fn halo(&self) -> &[VertexId] {
        &self.halo
    }

    /// `(vertex, hop)` for every halo vertex, ascending by vertex.
    pub fn halo_with_hops(&self) -> impl Iterator<Item = (VertexId, u32)> + '_ {
        self.halo.iter().copied().zip(self.halo_hops.iter().copied())
    }

    /// 0 for inner vertices, the inclusion hop for halo vertices.
    pub fn hop_of(&self, v: VertexId) -> Option<u32> {
        if self.inner.binary_search(&v).is_ok() {
            return Some(0);
        }
        self.halo.binary_search(&v).ok().map(|i| self.halo_hops[i])
    }

    pub fn contains(&self, v: VertexId) -> bool {
        self.hop_of(v).is_some()
    }

    /// Inner ∪ halo, ascending.
    pub fn vertices(&self) -> Vec<VertexId> {
        let mut all = Vec::with_capacity(self.len());
        let (mut i, mut j) = (0, 0);
        while i < self.inner.len() || j < self.halo.len() {
            if j == self.halo.len() || (i < self.inner.len() && self.inner[i] < self.halo[j]) {
                all.push(self.inner[i]);
                i += 1;
            } else {
                all.push(self.halo[j]);
                j += 1;
            }
        }
        all
    }

    pub fn len(&self) -> usize {
        self.inner.len() + self.halo.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Original-graph entries with both endpoints in the subgraph.
    pub fn induced_edges(&self) -> usize {
        self.induced_edges
    }

    pub fn hop_limit(&self) -> usize {
        self.hop_limit
    }

    pub fn extraction(&self) -> Extraction {
        self.extraction
    }

    /// Per-vertex hop array over the whole graph (`u32::MAX` = absent).
    pub fn hop_table(&self, num_vertices: usize) -> Vec<u32> {
        let mut table = vec![u32::MAX; num_vertices];
        for &v in &self.inner {
            table[v as usize] = 0;
        }
        for (v, h) in self.halo_with_hops() {
            table[v as usize] = h;
        }
        table
    }

    /// Debug dump: `inner:` then `halo:` sections of `vertex hop` pairs.
    pub fn dump(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "# server {} hop_limit {}", self.server_id, self.hop_limit);
        out.push_str("inner:\n");
        for v in &self.inner {
            let _ = writeln!(out, "{v} 0");
        }
        out.push_str("halo:\n");
        for (v, h) in self.halo_with_hops() {
            let _ = writeln!(out, "{v} {h}");
        }
        out
    }
}

/// One frontier expansion, recorded by `extract_sampled_traced`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TraceEntry {
    pub hop: u32,
    pub frontier_vertex: VertexId,
    pub added: Vec<VertexId>,
}

/// Dense membership for a vertex set, plus an optional universe restriction.
pub(crate) struct Region<'a> {
    pub inner: &'a [bool],
    pub allowed: Option<&'a [bool]>,
}

impl Region<'_> {
    #[inline]
    fn is_external(&self, u: VertexId) -> bool {
        !self.inner[u as usize] && self.allowed.is_none_or(|a| a[u as usize])
    }
}

fn server_inner(g: &Graph, sp: &Partition, server_id: usize) -> Result<(Vec<VertexId>, Vec<bool>)> {
    sp.check_shape(g)?;
    if server_id >= sp.num_parts() {
        return Err(Error::input(format!(
            "server {server_id} out of range for {} servers",
            sp.num_parts()
        )));
    }
    let inner = sp.members(server_id);
    let mut mask = vec![false; g.num_vertices()];
    for &v in &inner {
        mask[v as usize] = true;
    }
    Ok((inner, mask))
}

/// Multi-source BFS from `inner`, up to `hops` layers. Returns halo vertices
/// with their exact distance, in discovery order.
pub(crate) fn full_halo(g: &Graph, inner: &[VertexId], region: &Region<'_>, hops: usize) -> Vec<(VertexId, u32)> {
    let mut seen = vec![false; g.num_vertices()];
    let mut frontier: Vec<VertexId> = inner.to_vec();
    let mut halo = Vec::new();
    for hop in 1..=hops as u32 {
        let mut next = Vec::new();
        for &x in &frontier {
            for &u in g.neighbors(x) {
                if region.is_external(u) && !seen[u as usize] {
                    seen[u as usize] = true;
                    next.push(u);
                    halo.push((u, hop));
                }
            }
        }
        if next.is_empty() {
            break;
        }
        frontier = next;
    }
    halo
}

/// Hop-by-hop boundary sampling. Each frontier vertex ranks its neighbors by
/// a permutation keyed on `(seed, vertex)`, keeps the first `k` external
/// ones, and adds those not yet included.
pub(crate) fn sampled_halo(
    g: &Graph,
    inner: &[VertexId],
    region: &Region<'_>,
    cfg: &SamplingConfig,
    mut trace: Option<&mut Vec<TraceEntry>>,
) -> Vec<(VertexId, u32)> {
    let seed = derive_seed(cfg.seed, domain::EAS_FANOUT);
    let k = cfg.fanout.limit();
    let mut included = vec![false; g.num_vertices()];
    let mut frontier: Vec<VertexId> = inner
        .iter()
        .copied()
        .filter(|&v| g.neighbors(v).iter().any(|&u| region.is_external(u)))
        .collect();
    let mut halo = Vec::new();
    let mut ranked = Vec::new();
    for hop in 1..=cfg.max_hop as u32 {
        if k == 0 {
            break;
        }
        let mut next = Vec::new();
        for &x in &frontier {
            ranked.clear();
            ranked.extend_from_slice(g.neighbors(x));
            if k < ranked.len() {
                keyed_shuffle(&mut ranked, seed, x as u64);
            }
            let mut added = Vec::new();
            for &u in ranked.iter().filter(|&&u| region.is_external(u)).take(k) {
                if !included[u as usize] {
                    included[u as usize] = true;
                    next.push(u);
                    halo.push((u, hop));
                    added.push(u);
                }
            }
            if let Some(log) = trace.as_deref_mut() {
                log.push(TraceEntry {
                    hop,
                    frontier_vertex: x,
                    added,
                });
            }
        }
        if next.is_empty() {
            break;
        }
        next.sort_unstable();
        frontier = next;
    }
    halo
}

fn assemble(
    g: &Graph,
    server_id: usize,
    inner: Vec<VertexId>,
    mut halo: Vec<(VertexId, u32)>,
    hop_limit: usize,
    extraction: Extraction,
) -> DependencySubgraph {
    halo.sort_unstable();
    let mut member = vec![false; g.num_vertices()];
    for &v in inner.iter().chain(halo.iter().map(|(v, _)| v)) {
        member[v as usize] = true;
    }
    let induced_edges = inner
        .iter()
        .chain(halo.iter().map(|(v, _)| v))
        .map(|&v| g.neighbors(v).iter().filter(|&&u| member[u as usize]).count())
        .sum();
    let (halo, halo_hops) = halo.into_iter().unzip();
    DependencySubgraph {
        server_id,
        inner,
        halo,
        halo_hops,
        induced_edges,
        hop_limit,
        extraction,
    }
}

pub fn extract_full(g: &Graph, sp: &Partition, server_id: usize, layers: usize) -> Result<DependencySubgraph> {
    let (inner, mask) = server_inner(g, sp, server_id)?;
    let region = Region {
        inner: &mask,
        allowed: None,
    };
    let halo = full_halo(g, &inner, &region, layers);
    Ok(assemble(g, server_id, inner, halo, layers, Extraction::Full))
}

pub fn extract_sampled(g: &Graph, sp: &Partition, server_id: usize, cfg: &SamplingConfig) -> Result<DependencySubgraph> {
    Ok(extract_sampled_traced(g, sp, server_id, cfg)?.0)
}

/// `extract_sampled` that also returns every frontier expansion.
pub fn extract_sampled_traced(
    g: &Graph,
    sp: &Partition,
    server_id: usize,
    cfg: &SamplingConfig,
) -> Result<(DependencySubgraph, Vec<TraceEntry>)> {
    let (inner, mask) = server_inner(g, sp, server_id)?;
    let region = Region {
        inner: &mask,
        allowed: None,
    };
    let mut trace = Vec::new();
    let halo = sampled_halo(g, &inner, &region, cfg, Some(&mut trace));
    let sub = assemble(g, server_id, inner, halo, cfg.max_hop, Extraction::Sampled(*cfg));
    Ok((sub, trace))
}

/// Extracts with sampling when `cfg` is given, the full `layers`-hop closure
/// otherwise.
pub fn extract(g: &Graph, sp: &Partition, server_id: usize, layers: usize, cfg: Option<&SamplingConfig>) -> Result<DependencySubgraph> {
    match cfg {
        Some(cfg) => extract_sampled(g, sp, server_id, cfg),
        None => extract_full(g, sp, server_id, layers),
    }
}

/// Inner vertices with at least one neighbor outside the server.
pub fn boundary_vertices(g: &Graph, sp: &Partition, server_id: usize) -> Result<Vec<VertexId>> {
    let (inner, mask) = server_inner(g, sp, server_id)?;
    Ok(inner
        .into_iter()
        .filter(|&v| g.neighbors(v).iter().any(|&u| !mask[u as usize]))
        .collect())
}

/// `(L, |inner ∪ halo_L|)` for `L = 1..=max_layers`.
pub fn neighbor_explosion_profile(
    g: &Graph,
    sp: &Partition,
    server_id: usize,
    max_layers: usize,
) -> Result<Vec<(usize, usize)>> {
    if max_layers == 0 {
        return Err(Error::input("max_layers must be >= 1"));
    }
    let (inner, mask) = server_inner(g, sp, server_id)?;
    let region = Region {
        inner: &mask,
        allowed: None,
    };
    let halo = full_halo(g, &inner, &region, max_layers);
    let mut per_hop = vec![0usize; max_layers + 1];
    for &(_, h) in &halo {
        per_hop[h as usize] += 1;
    }
    let mut size = inner.len();
    Ok((1..=max_layers)
        .map(|l| {
            size += per_hop[l];
            (l, size)
        })
        .collect())
}
