//! Balanced vertex partitioning.
//!
//! `partition_mincut` is a METIS surrogate: greedy graph growing from
//! high-degree seeds, followed by boundary refinement that applies
//! positive-gain moves and, when balance blocks a move, pairwise swaps in
//! the style of Kernighan–Lin.

use std::cmp::Reverse;
use std::collections::BinaryHeap;
use std::path::Path;
use std::str::FromStr;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{Graph, VertexId};
use crate::rng::{derive_seed, domain, keyed_rng, keyed_shuffle};

pub const DEFAULT_EPSILON: f64 = 0.05;
const REFINE_PASSES: usize = 10;
const GROWTH_TRIALS: u64 = 4;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Partition {
    assignment: Vec<u32>,
    num_parts: usize,
    part_sizes: Vec<usize>,
}

impl Partition {
    pub fn new(assignment: Vec<u32>, num_parts: usize) -> Result<Self> {
        if num_parts == 0 {
            return Err(Error::input("a partition needs at least one part"));
        }
        let mut part_sizes = vec![0; num_parts];
        for (v, &p) in assignment.iter().enumerate() {
            let slot = part_sizes.get_mut(p as usize).ok_or_else(|| {
                Error::input(format!("vertex {v} assigned to part {p}, only {num_parts} parts"))
            })?;
            *slot += 1;
        }
        Ok(Partition {
            assignment,
            num_parts,
            part_sizes,
        })
    }

    /// Everything in part 0.
    pub fn single(num_vertices: usize) -> Self {
        Partition {
            assignment: vec![0; num_vertices],
            num_parts: 1,
            part_sizes: vec![num_vertices],
        }
    }

    #[inline]
    pub fn part_of(&self, v: VertexId) -> usize {
        self.assignment[v as usize] as usize
    }

    pub fn assignment(&self) -> &[u32] {
        &self.assignment
    }

    pub fn num_parts(&self) -> usize {
        self.num_parts
    }

    pub fn num_vertices(&self) -> usize {
        self.assignment.len()
    }

    pub fn part_sizes(&self) -> &[usize] {
        &self.part_sizes
    }

    /// Vertices of `part`, ascending.
    pub fn members(&self, part: usize) -> Vec<VertexId> {
        self.assignment
            .iter()
            .enumerate()
            .filter(|&(_, &p)| p as usize == part)
            .map(|(v, _)| v as VertexId)
            .collect()
    }

    /// Members of every part in one sweep.
    pub fn all_members(&self) -> Vec<Vec<VertexId>> {
        let mut out: Vec<Vec<VertexId>> =
            self.part_sizes.iter().map(|&s| Vec::with_capacity(s)).collect();
        for (v, &p) in self.assignment.iter().enumerate() {
            out[p as usize].push(v as VertexId);
        }
        out
    }

    pub(crate) fn check_shape(&self, g: &Graph) -> Result<()> {
        if self.assignment.len() != g.num_vertices() {
            return Err(Error::input(format!(
                "partition covers {} vertices, graph has {}",
                self.assignment.len(),
                g.num_vertices()
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CutReport {
    /// Crossing edges, undirected pairs counted once.
    pub edge_cut: usize,
    /// Edges counted under the same convention as `edge_cut`.
    pub total_edges: usize,
    pub cut_fraction: f64,
    /// Largest part relative to the ideal `n / parts`.
    pub balance_ratio: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PartitionMode {
    Random,
    MinCut,
}

impl FromStr for PartitionMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "random" => Ok(PartitionMode::Random),
            "mincut" => Ok(PartitionMode::MinCut),
            _ => Err(Error::input(format!("unknown partition mode {s:?}"))),
        }
    }
}

fn check_parts(g: &Graph, parts: usize) -> Result<()> {
    if parts == 0 || parts > g.num_vertices() {
        return Err(Error::input(format!(
            "cannot split {} vertices into {parts} parts",
            g.num_vertices()
        )));
    }
    Ok(())
}

/// Uniformly random balanced assignment: sizes differ by at most one.
pub fn partition_random(g: &Graph, parts: usize, seed: u64) -> Result<Partition> {
    check_parts(g, parts)?;
    let mut order: Vec<VertexId> = g.vertices().collect();
    keyed_shuffle(&mut order, derive_seed(seed, domain::RANDOM_PARTITION), 0);
    let mut assignment = vec![0u32; g.num_vertices()];
    for (i, &v) in order.iter().enumerate() {
        assignment[v as usize] = (i % parts) as u32;
    }
    Partition::new(assignment, parts)
}

pub fn evaluate_cut(g: &Graph, p: &Partition) -> Result<CutReport> {
    p.check_shape(g)?;
    let edge_cut = g
        .edges()
        .filter(|&(v, u)| (!g.is_undirected() || u > v) && p.part_of(u) != p.part_of(v))
        .count();
    let total_edges = g.num_edge_pairs();
    let ideal = g.num_vertices() as f64 / p.num_parts() as f64;
    let largest = p.part_sizes().iter().copied().max().unwrap_or(0);
    Ok(CutReport {
        edge_cut,
        total_edges,
        cut_fraction: if total_edges == 0 { 0.0 } else { edge_cut as f64 / total_edges as f64 },
        balance_ratio: largest as f64 / ideal,
    })
}

/// Largest part size allowed under imbalance `epsilon`.
pub fn max_part_size(num_vertices: usize, parts: usize, epsilon: f64) -> usize {
    let ceil = num_vertices.div_ceil(parts);
    ((ceil as f64 * (1.0 + epsilon)).floor() as usize).max(ceil)
}

fn min_part_size(num_vertices: usize, parts: usize, epsilon: f64) -> usize {
    let floor = num_vertices / parts;
    ((floor as f64 * (1.0 - epsilon)).floor().max(1.0) as usize).min(floor.max(1))
}

/// Balanced min-cut partition.
///
/// Runs a few growth trials (the first from the highest-degree vertex, the
/// rest from seeded random starts), refines each, and keeps the lowest cut.
pub fn partition_mincut(g: &Graph, parts: usize, seed: u64, epsilon: f64) -> Result<Partition> {
    check_parts(g, parts)?;
    if !(epsilon >= 0.0) {
        return Err(Error::input(format!("epsilon must be >= 0, got {epsilon}")));
    }
    let n = g.num_vertices();
    if parts == 1 {
        return Ok(Partition::single(n));
    }
    let bounds = SizeBounds {
        min: min_part_size(n, parts, epsilon),
        max: max_part_size(n, parts, epsilon),
    };
    let mut best: Option<(usize, Vec<u32>)> = None;
    for trial in 0..GROWTH_TRIALS {
        let mut assignment = grow_regions(g, parts, seed, trial);
        refine(g, parts, bounds, &mut assignment);
        let cut = raw_cut(g, &assignment);
        if best.as_ref().is_none_or(|(c, _)| cut < *c) {
            best = Some((cut, assignment));
        }
    }
    let (_, assignment) = best.expect("at least one trial");
    Partition::new(assignment, parts)
}

#[derive(Clone, Copy)]
struct SizeBounds {
    min: usize,
    max: usize,
}

fn raw_cut(g: &Graph, assignment: &[u32]) -> usize {
    g.edges()
        .filter(|&(v, u)| assignment[v as usize] != assignment[u as usize])
        .count()
}

fn target_sizes(n: usize, parts: usize) -> Vec<usize> {
    (0..parts).map(|p| n / parts + usize::from(p < n % parts)).collect()
}

const UNASSIGNED: u32 = u32::MAX;

/// Greedy graph growing: parts are grown one at a time, always absorbing the
/// frontier vertex whose inclusion removes the most cut edges.
fn grow_regions(g: &Graph, parts: usize, seed: u64, trial: u64) -> Vec<u32> {
    let n = g.num_vertices();
    let targets = target_sizes(n, parts);
    let mut assignment = vec![UNASSIGNED; n];
    let mut by_degree: Vec<VertexId> = g.vertices().collect();
    by_degree.sort_by_key(|&v| (Reverse(g.degree(v)), v));
    let mut degree_cursor = 0;
    let mut free_degree: Vec<i64> = g.vertices().map(|v| g.degree(v) as i64).collect();
    let mut conn = vec![0i64; n];
    let mut stamp = vec![UNASSIGNED; n];
    let mut remaining = n;
    let mut rng = keyed_rng(derive_seed(seed, trial), 0);

    for (part, &target) in targets.iter().enumerate().take(parts - 1) {
        let part_id = part as u32;
        let mut heap: BinaryHeap<(i64, Reverse<VertexId>)> = BinaryHeap::new();
        let mut size = 0;
        while size < target {
            let next = loop {
                match heap.pop() {
                    Some((gain, Reverse(v))) => {
                        let v_us = v as usize;
                        if assignment[v_us] == UNASSIGNED && gain == conn[v_us] - free_degree[v_us] {
                            break Some(v);
                        }
                    }
                    None => break None,
                }
            };
            let v = match next {
                Some(v) => v,
                None => {
                    // Frontier exhausted: start a new region.
                    if trial > 0 && size == 0 {
                        pick_random_free(&assignment, remaining, &mut rng)
                    } else {
                        while assignment[by_degree[degree_cursor] as usize] != UNASSIGNED {
                            degree_cursor += 1;
                        }
                        by_degree[degree_cursor]
                    }
                }
            };
            assignment[v as usize] = part_id;
            size += 1;
            remaining -= 1;
            for &u in g.neighbors(v) {
                let u_us = u as usize;
                free_degree[u_us] -= 1;
                if assignment[u_us] != UNASSIGNED {
                    continue;
                }
                if stamp[u_us] != part_id {
                    stamp[u_us] = part_id;
                    conn[u_us] = 0;
                }
                conn[u_us] += 1;
                heap.push((conn[u_us] - free_degree[u_us], Reverse(u)));
            }
        }
    }
    let last = (parts - 1) as u32;
    for a in assignment.iter_mut().filter(|a| **a == UNASSIGNED) {
        *a = last;
    }
    assignment
}

fn pick_random_free<R: Rng>(assignment: &[u32], remaining: usize, rng: &mut R) -> VertexId {
    let k = rng.gen_range(0..remaining);
    assignment
        .iter()
        .enumerate()
        .filter(|&(_, &a)| a == UNASSIGNED)
        .nth(k)
        .map(|(v, _)| v as VertexId)
        .expect("remaining counts free vertices")
}

/// Per-vertex connectivity to each neighboring part, reused across calls.
struct ConnScratch {
    counts: Vec<i64>,
    touched: Vec<usize>,
}

impl ConnScratch {
    fn new(parts: usize) -> Self {
        ConnScratch {
            counts: vec![0; parts],
            touched: Vec::new(),
        }
    }

    fn load(&mut self, g: &Graph, assignment: &[u32], v: VertexId) {
        for &p in &self.touched {
            self.counts[p] = 0;
        }
        self.touched.clear();
        for &u in g.neighbors(v) {
            let p = assignment[u as usize] as usize;
            if self.counts[p] == 0 {
                self.touched.push(p);
            }
            self.counts[p] += 1;
        }
        self.touched.sort_unstable();
    }
}

fn refine(g: &Graph, parts: usize, bounds: SizeBounds, assignment: &mut [u32]) {
    let mut sizes = vec![0usize; parts];
    for &a in assignment.iter() {
        sizes[a as usize] += 1;
    }
    let mut scratch = ConnScratch::new(parts);
    for _ in 0..REFINE_PASSES {
        let mut improved = false;
        // (gain, vertex) wishes to move from part a to part b, blocked by balance.
        let mut wishes: Vec<Vec<Vec<(i64, VertexId)>>> = vec![vec![Vec::new(); parts]; parts];
        for v in g.vertices() {
            let from = assignment[v as usize] as usize;
            scratch.load(g, assignment, v);
            let own = scratch.counts[from];
            let mut best: Option<(i64, usize)> = None;
            for &p in &scratch.touched {
                if p == from {
                    continue;
                }
                let gain = scratch.counts[p] - own;
                if best.is_none_or(|(bg, _)| gain > bg) {
                    best = Some((gain, p));
                }
                wishes[from][p].push((gain, v));
            }
            if let Some((gain, to)) = best {
                if gain > 0 && sizes[to] < bounds.max && sizes[from] > bounds.min {
                    assignment[v as usize] = to as u32;
                    sizes[from] -= 1;
                    sizes[to] += 1;
                    improved = true;
                }
            }
        }
        for a in 0..parts {
            for b in a + 1..parts {
                improved |= swap_pass(g, assignment, a, b, &mut wishes, &mut scratch);
            }
        }
        if !improved {
            break;
        }
    }
}

/// Swaps vertex pairs between parts `a` and `b` while the exchange lowers
/// the cut. Gains are recomputed against the current assignment.
fn swap_pass(
    g: &Graph,
    assignment: &mut [u32],
    a: usize,
    b: usize,
    wishes: &mut [Vec<Vec<(i64, VertexId)>>],
    scratch: &mut ConnScratch,
) -> bool {
    let mut left = std::mem::take(&mut wishes[a][b]);
    let mut right = std::mem::take(&mut wishes[b][a]);
    if left.is_empty() || right.is_empty() {
        return false;
    }
    left.sort_by_key(|&(gain, v)| (Reverse(gain), v));
    right.sort_by_key(|&(gain, v)| (Reverse(gain), v));
    let mut gain_of = |v: VertexId, from: usize, to: usize, assignment: &[u32]| -> Option<i64> {
        if assignment[v as usize] as usize != from {
            return None;
        }
        scratch.load(g, assignment, v);
        Some(scratch.counts[to] - scratch.counts[from])
    };
    let mut improved = false;
    let (mut i, mut j) = (0, 0);
    while i < left.len() && j < right.len() {
        let (u, w) = (left[i].1, right[j].1);
        let (Some(gu), Some(gw)) = (gain_of(u, a, b, assignment), gain_of(w, b, a, assignment)) else {
            if assignment[u as usize] as usize != a {
                i += 1;
            } else {
                j += 1;
            }
            continue;
        };
        let adjacent = i64::from(g.neighbors(u).binary_search(&w).is_ok())
            + i64::from(g.neighbors(w).binary_search(&u).is_ok());
        if gu + gw - adjacent <= 0 {
            // Lists are sorted by stale gain; stop once the best pair fails.
            if gu + gw <= 0 {
                break;
            }
            j += 1;
            continue;
        }
        assignment[u as usize] = b as u32;
        assignment[w as usize] = a as u32;
        improved = true;
        i += 1;
        j += 1;
    }
    improved
}

/// Two-level split: servers first, then each server's vertices across its
/// GPUs. GPU part `s * gpus_per_server + j` lies inside server part `s`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HierarchicalPartition {
    pub servers: Partition,
    pub gpus: Partition,
    pub gpus_per_server: usize,
}

impl HierarchicalPartition {
    /// Rebuilds the server level from a GPU-level assignment.
    pub fn from_gpu_partition(gpus: Partition, gpus_per_server: usize) -> Result<Self> {
        if gpus_per_server == 0 || !gpus.num_parts().is_multiple_of(gpus_per_server) {
            return Err(Error::input(format!(
                "{} GPU parts cannot be grouped by {gpus_per_server} per server",
                gpus.num_parts()
            )));
        }
        let servers = Partition::new(
            gpus.assignment()
                .iter()
                .map(|&p| p / gpus_per_server as u32)
                .collect(),
            gpus.num_parts() / gpus_per_server,
        )?;
        Ok(HierarchicalPartition {
            servers,
            gpus,
            gpus_per_server,
        })
    }

    pub fn num_servers(&self) -> usize {
        self.servers.num_parts()
    }

    pub fn server_of_gpu(&self, gpu: usize) -> usize {
        gpu / self.gpus_per_server
    }

    /// Checks that every GPU part lies inside its server part.
    pub fn is_refinement(&self) -> bool {
        self.gpus.assignment().iter().zip(self.servers.assignment()).all(|(&gp, &sp)| {
            gp as usize / self.gpus_per_server == sp as usize
        })
    }
}

pub fn partition_with_mode(
    g: &Graph,
    parts: usize,
    mode: PartitionMode,
    seed: u64,
    epsilon: f64,
) -> Result<Partition> {
    match mode {
        PartitionMode::Random => partition_random(g, parts, seed),
        PartitionMode::MinCut => partition_mincut(g, parts, seed, epsilon),
    }
}

pub fn hierarchical_partition(
    g: &Graph,
    servers: usize,
    gpus_per_server: usize,
    mode: PartitionMode,
    seed: u64,
    epsilon: f64,
) -> Result<HierarchicalPartition> {
    if servers == 0 || gpus_per_server == 0 {
        return Err(Error::input("servers and gpus_per_server must be >= 1"));
    }
    if servers * gpus_per_server > g.num_vertices() {
        return Err(Error::input(format!(
            "{servers}x{gpus_per_server} workers exceed {} vertices",
            g.num_vertices()
        )));
    }
    let server_part = partition_with_mode(g, servers, mode, seed, epsilon)?;
    let mut gpu_assignment = vec![0u32; g.num_vertices()];
    for (s, members) in server_part.all_members().into_iter().enumerate() {
        if members.len() < gpus_per_server {
            return Err(Error::input(format!(
                "server {s} received {} vertices, fewer than its {gpus_per_server} GPUs",
                members.len()
            )));
        }
        let sub = g.induced(&members);
        let local = partition_with_mode(&sub, gpus_per_server, mode, derive_seed(seed, s as u64 + 1), epsilon)?;
        for (i, &v) in members.iter().enumerate() {
            gpu_assignment[v as usize] = (s * gpus_per_server + local.part_of(i as VertexId)) as u32;
        }
    }
    let gpus = Partition::new(gpu_assignment, servers * gpus_per_server)?;
    Ok(HierarchicalPartition {
        servers: server_part,
        gpus,
        gpus_per_server,
    })
}

/// Partition file: optional `# parts K` (and `# gpus-per-server G`) header
/// lines, then the part id of vertex `i` on line `i`.
pub fn write_partition(p: &Partition, gpus_per_server: Option<usize>) -> String {
    let mut out = String::with_capacity(p.num_vertices() * 3 + 32);
    out.push_str(&format!("# parts {}\n", p.num_parts()));
    if let Some(g) = gpus_per_server {
        out.push_str(&format!("# gpus-per-server {g}\n"));
    }
    for &a in p.assignment() {
        out.push_str(&a.to_string());
        out.push('\n');
    }
    out
}

/// Parses a partition file, returning the partition and the
/// `gpus-per-server` header when present.
pub fn parse_partition(text: &str, origin: &Path) -> Result<(Partition, Option<usize>)> {
    let mut declared = None;
    let mut per_server = None;
    let mut assignment = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = raw.trim();
        let parse_err = |message: String| Error::Parse {
            path: origin.to_path_buf(),
            line: idx + 1,
            message,
        };
        if line.is_empty() {
            continue;
        }
        if let Some(comment) = line.strip_prefix('#') {
            let mut words = comment.split_whitespace();
            let key = words.next();
            let value = words.next().and_then(|w| w.parse::<usize>().ok());
            match key {
                Some("parts") => {
                    declared = Some(value.ok_or_else(|| parse_err("malformed `# parts K`".into()))?)
                }
                Some("gpus-per-server") => {
                    per_server = Some(
                        value.ok_or_else(|| parse_err("malformed `# gpus-per-server G`".into()))?,
                    )
                }
                _ => {}
            }
            continue;
        }
        let part = line
            .parse::<u32>()
            .map_err(|e| parse_err(format!("bad part id {line:?}: {e}")))?;
        assignment.push(part);
    }
    let parts = match declared {
        Some(k) => k,
        None => assignment.iter().max().map_or(1, |&m| m as usize + 1),
    };
    Ok((Partition::new(assignment, parts)?, per_server))
}

pub fn load_partition(path: impl AsRef<Path>) -> Result<(Partition, Option<usize>)> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_partition(&text, path)
}
