//! Seeded synthetic generators.
//!
//! Both generators draw the edges `(u, v > u)` of vertex `u` from a stream
//! keyed by `(seed, u)`, skipping geometrically between accepted candidates,
//! so the cost is proportional to the number of edges produced.

use rand::Rng;

use super::{Graph, VertexId};
use crate::error::{Error, Result};
use crate::rng::{derive_seed, domain, keyed_rng};

/// Erdős–Rényi `G(n, p)` with `p = avg_degree / (n - 1)`, so the expected
/// average degree (entries per vertex) equals `avg_degree`.
pub fn gen_random_graph(n: usize, avg_degree: f64, seed: u64) -> Result<Graph> {
    if n == 0 {
        return Err(Error::input("n must be at least 1"));
    }
    if !(avg_degree >= 0.0) || !avg_degree.is_finite() {
        return Err(Error::input(format!("avg_degree {avg_degree} must be a finite value >= 0")));
    }
    if avg_degree > (n - 1) as f64 {
        return Err(Error::input(format!(
            "avg_degree {avg_degree} impossible for a simple graph on {n} vertices"
        )));
    }
    let p = if n > 1 { avg_degree / (n - 1) as f64 } else { 0.0 };
    let seed = derive_seed(seed, domain::RANDOM_GRAPH);
    let upper = (0..n)
        .map(|u| {
            let mut rng = keyed_rng(seed, u as u64);
            let mut out = Vec::new();
            sample_range(&mut rng, u + 1, n, p, &mut out);
            out
        })
        .collect();
    Ok(Graph::from_upper_lists(upper))
}

/// Block of vertex `v` when `n` vertices are split into `parts` contiguous
/// blocks, the first `n % parts` blocks holding one extra vertex.
pub fn planted_block_of(v: usize, n: usize, parts: usize) -> usize {
    let (base, extra) = (n / parts, n % parts);
    let big = extra * (base + 1);
    if v < big {
        v / (base + 1)
    } else {
        extra + (v - big) / base
    }
}

fn block_end(block: usize, n: usize, parts: usize) -> usize {
    let (base, extra) = (n / parts, n % parts);
    (block + 1) * base + (block + 1).min(extra)
}

/// Planted-partition graph: pairs inside a block connect with `p_in`, pairs
/// across blocks with `p_out`.
pub fn gen_planted_partition_graph(
    n: usize,
    parts: usize,
    p_in: f64,
    p_out: f64,
    seed: u64,
) -> Result<Graph> {
    if n == 0 {
        return Err(Error::input("n must be at least 1"));
    }
    if parts == 0 || parts > n {
        return Err(Error::input(format!("parts must be in 1..={n}, got {parts}")));
    }
    for (name, p) in [("p_in", p_in), ("p_out", p_out)] {
        if !(0.0..=1.0).contains(&p) {
            return Err(Error::input(format!("{name} = {p} is not a probability")));
        }
    }
    let seed = derive_seed(seed, domain::PLANTED_GRAPH);
    let upper = (0..n)
        .map(|u| {
            let mut rng = keyed_rng(seed, u as u64);
            let end = block_end(planted_block_of(u, n, parts), n, parts);
            let mut out = Vec::new();
            sample_range(&mut rng, u + 1, end, p_in, &mut out);
            sample_range(&mut rng, end, n, p_out, &mut out);
            out
        })
        .collect();
    Ok(Graph::from_upper_lists(upper))
}

/// Appends each id in `lo..hi` independently with probability `p`, ascending.
fn sample_range<R: Rng>(rng: &mut R, lo: usize, hi: usize, p: f64, out: &mut Vec<VertexId>) {
    if lo >= hi || p <= 0.0 {
        return;
    }
    if p >= 1.0 {
        out.extend(lo as VertexId..hi as VertexId);
        return;
    }
    let log_q = (1.0 - p).ln();
    let mut next = lo as f64;
    loop {
        let r: f64 = rng.gen();
        next += ((1.0 - r).ln() / log_q).floor();
        if next >= hi as f64 {
            break;
        }
        out.push(next as VertexId);
        next += 1.0;
    }
}
