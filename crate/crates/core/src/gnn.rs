//! Deterministic reference forward pass used as a correctness oracle.
//!
//! Each layer computes `h_v = ReLU(W · (h_v + Σ_{u ∈ N(v)} h_u))`, summing the
//! vertex's own state first and then its neighbors in ascending id order.
//! With a fixed order, a server-local evaluation over a complete dependency
//! closure reproduces the full-graph result bit for bit.

use std::collections::HashMap;

use rand::Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::extract::{extract, DependencySubgraph, Extraction, SamplingConfig};
use crate::graph::{Graph, VertexId};
use crate::partition::Partition;
use crate::rng::{derive_seed, domain, keyed_rng};

#[derive(Debug, Clone, PartialEq)]
pub struct DenseFeatures {
    rows: usize,
    width: usize,
    data: Vec<f64>,
}

impl DenseFeatures {
    pub fn new(rows: usize, width: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != rows * width {
            return Err(Error::input(format!(
                "{} values cannot fill {rows}x{width} features",
                data.len()
            )));
        }
        if data.iter().any(|x| !x.is_finite()) {
            return Err(Error::input("features must be finite"));
        }
        Ok(DenseFeatures { rows, width, data })
    }

    /// Uniform(-1, 1) rows, each row drawn from its own keyed stream.
    pub fn random(rows: usize, width: usize, seed: u64) -> Self {
        let seed = derive_seed(seed, domain::FEATURES);
        let mut data = Vec::with_capacity(rows * width);
        for r in 0..rows {
            let mut rng = keyed_rng(seed, r as u64);
            data.extend((0..width).map(|_| rng.gen_range(-1.0..1.0)));
        }
        DenseFeatures { rows, width, data }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.width..(i + 1) * self.width]
    }

    pub fn row_mut(&mut self, i: usize) -> &mut [f64] {
        &mut self.data[i * self.width..(i + 1) * self.width]
    }

    /// Rows `indices[0], indices[1], ...` as a new table.
    pub fn select(&self, indices: &[VertexId]) -> DenseFeatures {
        let mut data = Vec::with_capacity(indices.len() * self.width);
        for &i in indices {
            data.extend_from_slice(self.row(i as usize));
        }
        DenseFeatures {
            rows: indices.len(),
            width: self.width,
            data,
        }
    }

    pub fn max_abs_diff(&self, other: &DenseFeatures) -> f64 {
        assert_eq!((self.rows, self.width), (other.rows, other.width));
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }
}

/// Row-major `out x inp` matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct Matrix {
    out: usize,
    inp: usize,
    data: Vec<f64>,
}

impl Matrix {
    pub fn new(out: usize, inp: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != out * inp || data.iter().any(|x| !x.is_finite()) {
            return Err(Error::input(format!("bad {out}x{inp} matrix data")));
        }
        Ok(Matrix { out, inp, data })
    }

    pub fn identity(n: usize) -> Self {
        let mut data = vec![0.0; n * n];
        for i in 0..n {
            data[i * n + i] = 1.0;
        }
        Matrix { out: n, inp: n, data }
    }

    fn apply_relu(&self, x: &[f64], y: &mut [f64]) {
        for (i, yi) in y.iter_mut().enumerate() {
            let row = &self.data[i * self.inp..(i + 1) * self.inp];
            let dot: f64 = row.iter().zip(x).map(|(w, v)| w * v).sum();
            *yi = dot.max(0.0);
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LayerWeights {
    layers: Vec<Matrix>,
}

impl LayerWeights {
    pub fn new(layers: Vec<Matrix>) -> Result<Self> {
        for (l, pair) in layers.windows(2).enumerate() {
            if pair[1].inp != pair[0].out {
                return Err(Error::input(format!(
                    "layer {} expects width {}, layer {l} produces {}",
                    l + 1,
                    pair[1].inp,
                    pair[0].out
                )));
            }
        }
        Ok(LayerWeights { layers })
    }

    /// Uniform(-0.5, 0.5) weights: `hidden x feature_dim`, then `hidden x hidden`.
    pub fn random(feature_dim: usize, hidden: usize, layers: usize, seed: u64) -> Self {
        let seed = derive_seed(seed, domain::WEIGHTS);
        let layers = (0..layers)
            .map(|l| {
                let inp = if l == 0 { feature_dim } else { hidden };
                let mut rng = keyed_rng(seed, l as u64);
                let data = (0..hidden * inp).map(|_| rng.gen_range(-0.5..0.5)).collect();
                Matrix { out: hidden, inp, data }
            })
            .collect();
        LayerWeights { layers }
    }

    pub fn num_layers(&self) -> usize {
        self.layers.len()
    }

    fn check(&self, input_width: usize, layers: usize) -> Result<()> {
        if layers > self.layers.len() {
            return Err(Error::input(format!(
                "{layers} layers requested, {} weight matrices available",
                self.layers.len()
            )));
        }
        if layers > 0 && self.layers[0].inp != input_width {
            return Err(Error::input(format!(
                "input width {input_width} does not match first layer width {}",
                self.layers[0].inp
            )));
        }
        Ok(())
    }
}

/// Full-graph forward pass; returns layer-`layers` states of every vertex.
pub fn forward_full(g: &Graph, x: &DenseFeatures, w: &LayerWeights, layers: usize) -> Result<DenseFeatures> {
    if x.rows() != g.num_vertices() {
        return Err(Error::input(format!(
            "{} feature rows for {} vertices",
            x.rows(),
            g.num_vertices()
        )));
    }
    w.check(x.width(), layers)?;
    let mut h = x.clone();
    for weights in &w.layers[..layers] {
        let mut next = DenseFeatures {
            rows: h.rows,
            width: weights.out,
            data: vec![0.0; h.rows * weights.out],
        };
        let mut acc = vec![0.0; h.width];
        for v in g.vertices() {
            acc.copy_from_slice(h.row(v as usize));
            for &u in g.neighbors(v) {
                for (a, b) in acc.iter_mut().zip(h.row(u as usize)) {
                    *a += b;
                }
            }
            weights.apply_relu(&acc, next.row_mut(v as usize));
        }
        h = next;
    }
    Ok(h)
}

/// Forward pass over a vertex subset. `depth` maps each present vertex to
/// the deepest layer it is evaluated at; a vertex's layer-`l` state sums the
/// layer-`l-1` states of the neighbors that have one. Returns the final
/// states of `targets`, which must all have depth `layers`.
pub fn forward_masked(
    g: &Graph,
    x: &DenseFeatures,
    w: &LayerWeights,
    layers: usize,
    depth: &HashMap<VertexId, usize>,
    targets: &[VertexId],
) -> Result<DenseFeatures> {
    w.check(x.width(), layers)?;
    if let Some(&t) = targets.iter().find(|t| depth.get(t).copied() != Some(layers)) {
        return Err(Error::Contract(format!("target {t} is not evaluated to layer {layers}")));
    }
    let mut order: Vec<VertexId> = depth.keys().copied().collect();
    order.sort_unstable();
    let local: HashMap<VertexId, usize> = order.iter().enumerate().map(|(i, &v)| (v, i)).collect();
    let depth_of: Vec<usize> = order.iter().map(|v| depth[v]).collect();
    let mut h = x.select(&order);
    for (l, weights) in w.layers[..layers].iter().enumerate() {
        let layer = l + 1;
        let mut next = DenseFeatures {
            rows: order.len(),
            width: weights.out,
            data: vec![0.0; order.len() * weights.out],
        };
        let mut acc = vec![0.0; h.width];
        for (i, &v) in order.iter().enumerate() {
            if depth_of[i] < layer {
                continue;
            }
            acc.copy_from_slice(h.row(i));
            for &u in g.neighbors(v) {
                if let Some(&j) = local.get(&u) {
                    if depth_of[j] + 1 >= layer {
                        for (a, b) in acc.iter_mut().zip(h.row(j)) {
                            *a += b;
                        }
                    }
                }
            }
            weights.apply_relu(&acc, next.row_mut(i));
        }
        h = next;
    }
    let rows: Vec<VertexId> = targets.iter().map(|t| local[t] as VertexId).collect();
    Ok(h.select(&rows))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LocalMode {
    /// Require a dependency closure deep enough to reproduce full-graph outputs.
    Exact,
    /// Evaluate whatever the subgraph holds; sampled-away neighbors are skipped.
    BestEffort,
}

/// Evaluates the server's inner outputs using only inner ∪ halo vertices.
/// A halo vertex at hop `h` is evaluated up to layer `layers - h`.
pub fn forward_server_local(
    sub: &DependencySubgraph,
    g: &Graph,
    x: &DenseFeatures,
    w: &LayerWeights,
    layers: usize,
    mode: LocalMode,
) -> Result<DenseFeatures> {
    if mode == LocalMode::Exact {
        let complete = match sub.extraction() {
            Extraction::Full => sub.hop_limit() >= layers,
            Extraction::Sampled(cfg) => cfg.is_exhaustive_for(layers),
        };
        if !complete {
            return Err(Error::Contract(format!(
                "server {} subgraph cannot reproduce {layers}-layer outputs exactly",
                sub.server_id
            )));
        }
    }
    let mut depth = HashMap::with_capacity(sub.len());
    for &v in sub.inner() {
        depth.insert(v, layers);
    }
    for (v, hop) in sub.halo_with_hops() {
        if let Some(d) = layers.checked_sub(hop as usize) {
            depth.insert(v, d);
        }
    }
    forward_masked(g, x, w, layers, &depth, sub.inner())
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EquivalenceReport {
    pub per_server: Vec<f64>,
    pub max_deviation: f64,
}

/// Compares server-local evaluation with the full-graph pass for every server.
pub fn equivalence_check(
    g: &Graph,
    sp: &Partition,
    layers: usize,
    hidden: usize,
    seed: u64,
    sampling: Option<&SamplingConfig>,
) -> Result<EquivalenceReport> {
    let x = DenseFeatures::random(g.num_vertices(), g.feature_dim(), seed);
    let w = LayerWeights::random(g.feature_dim(), hidden, layers, seed);
    let full = forward_full(g, &x, &w, layers)?;
    let mode = if sampling.is_some() { LocalMode::BestEffort } else { LocalMode::Exact };
    let mut per_server = Vec::with_capacity(sp.num_parts());
    for s in 0..sp.num_parts() {
        let sub = extract(g, sp, s, layers, sampling)?;
        let local = forward_server_local(&sub, g, &x, &w, layers, mode)?;
        per_server.push(local.max_abs_diff(&full.select(sub.inner())));
    }
    let max_deviation = per_server.iter().copied().fold(0.0, f64::max);
    Ok(EquivalenceReport {
        per_server,
        max_deviation,
    })
}
