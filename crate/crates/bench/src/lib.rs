//! Shared fixtures for the criterion benches.

use depsim_core::graph::gen_planted_partition_graph;
use depsim_core::Graph;

/// Four-block planted graph with average degree close to 20.
pub fn planted_fixture(n: usize, seed: u64) -> Graph {
    let block = n as f64 / 4.0;
    let p_in = 16.0 / block;
    let p_out = 4.0 / (n as f64 - block);
    gen_planted_partition_graph(n, 4, p_in.min(1.0), p_out.min(1.0), seed).expect("valid fixture")
}
