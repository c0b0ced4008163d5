//! Closed-form epoch-time model for baseline full-graph training, shared
//! preloading, and boundary-sampled preloading.
//!
//! Rates are in vertices per second; bandwidths are per GPU. The per-layer
//! dependency growth `D^α` is supplied directly as `d_alpha`, and growth
//! factors are products (`D^α · L`, `m^α · k`).

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::Graph;

/// Upper end of the crossover scan.
pub const MAX_CROSSOVER_LAYERS: usize = 1024;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ClusterSpec {
    pub num_servers: usize,
    pub gpus_per_server: usize,
    pub compute_vps: f64,
    pub internal_bw_vps: f64,
    pub external_bw_vps: f64,
    pub gpu_mem_bytes: u64,
}

impl ClusterSpec {
    pub fn validate(&self) -> Result<()> {
        if self.num_servers == 0 || self.gpus_per_server == 0 {
            return Err(Error::input("cluster needs at least one server and one GPU per server"));
        }
        for (name, rate) in [
            ("compute_vps", self.compute_vps),
            ("internal_bw_vps", self.internal_bw_vps),
            ("external_bw_vps", self.external_bw_vps),
        ] {
            if !(rate > 0.0) {
                return Err(Error::input(format!("{name} must be > 0, got {rate}")));
            }
        }
        Ok(())
    }

    pub fn workers(&self) -> usize {
        self.num_servers * self.gpus_per_server
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let spec: ClusterSpec = serde_json::from_str(text)?;
        spec.validate()?;
        Ok(spec)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_json(&text)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("plain struct serializes")
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModelSpec {
    pub layers: usize,
    pub hidden_dim: usize,
    pub feature_dim: usize,
    /// Per-layer dependency growth `D^α`.
    pub d_alpha: f64,
}

impl ModelSpec {
    pub fn validate(&self) -> Result<()> {
        if self.layers == 0 || self.hidden_dim == 0 {
            return Err(Error::input("model needs layers >= 1 and hidden_dim >= 1"));
        }
        if !(self.d_alpha >= 1.0) {
            return Err(Error::input(format!("d_alpha must be >= 1, got {}", self.d_alpha)));
        }
        Ok(())
    }

    pub fn with_layers(self, layers: usize) -> Self {
        ModelSpec { layers, ..self }
    }

    /// Width of the layer-`l` state vectors.
    pub fn width(&self, layer: usize) -> usize {
        if layer == 0 {
            self.feature_dim
        } else {
            self.hidden_dim
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WorkloadSpec {
    pub vertices: f64,
    pub edges: f64,
}

impl WorkloadSpec {
    pub fn new(vertices: f64, edges: f64) -> Self {
        WorkloadSpec { vertices, edges }
    }

    pub fn of_graph(g: &Graph) -> Self {
        WorkloadSpec {
            vertices: g.num_vertices() as f64,
            edges: g.num_edges() as f64,
        }
    }

    /// Average degree `E / V`.
    pub fn avg_degree(&self) -> f64 {
        self.edges / self.vertices
    }
}

/// Separate terms of an epoch-time estimate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TimeTerms {
    pub compute_s: f64,
    pub internal_s: f64,
    pub external_s: f64,
}

impl TimeTerms {
    pub fn total(&self) -> f64 {
        self.compute_s + self.internal_s + self.external_s
    }
}

pub fn t_prev_terms(w: &WorkloadSpec, c: &ClusterSpec) -> TimeTerms {
    let (ns, ng) = (c.num_servers as f64, c.gpus_per_server as f64);
    let workers = ns * ng;
    let per_worker_edges = w.edges / workers;
    TimeTerms {
        compute_s: w.vertices / (workers * c.compute_vps),
        internal_s: per_worker_edges * ((ng - 1.0) / (ng * ns)) / c.internal_bw_vps,
        external_s: per_worker_edges * (1.0 - 1.0 / ns) / c.external_bw_vps,
    }
}

/// Baseline full-graph epoch time.
pub fn t_prev(w: &WorkloadSpec, c: &ClusterSpec) -> f64 {
    t_prev_terms(w, c).total()
}

pub fn t_preload_terms(w: &WorkloadSpec, c: &ClusterSpec, m: &ModelSpec) -> TimeTerms {
    let (ns, ng) = (c.num_servers as f64, c.gpus_per_server as f64);
    let workers = ns * ng;
    let growth = m.d_alpha * m.layers as f64;
    TimeTerms {
        compute_s: w.vertices * growth / (workers * c.compute_vps),
        internal_s: (w.edges * growth / workers) * ((ng - 1.0) / ng) / c.internal_bw_vps,
        external_s: 0.0,
    }
}

/// Shared-preloading epoch time; has no external-bandwidth term.
pub fn t_preload(w: &WorkloadSpec, c: &ClusterSpec, m: &ModelSpec) -> f64 {
    t_preload_terms(w, c, m).total()
}

/// Sampling growth factor `m^α · k`.
pub fn sampling_factor(max_hop: usize, fanout: usize, alpha: f64) -> f64 {
    (max_hop as f64).powf(alpha) * fanout as f64
}

/// Boundary-sampled preloading epoch time. The internal coefficient
/// `(N_s·N_g − 1) / B_internal` is kept exactly as the model states it.
pub fn t_sampling_terms(w: &WorkloadSpec, c: &ClusterSpec, max_hop: usize, fanout: usize, alpha: f64) -> TimeTerms {
    let workers = (c.num_servers * c.gpus_per_server) as f64;
    let growth = sampling_factor(max_hop, fanout, alpha);
    TimeTerms {
        compute_s: w.vertices * growth / (workers * c.compute_vps),
        internal_s: (w.edges * growth / workers) * ((workers - 1.0) / c.internal_bw_vps),
        external_s: 0.0,
    }
}

pub fn t_sampling(w: &WorkloadSpec, c: &ClusterSpec, max_hop: usize, fanout: usize, alpha: f64) -> f64 {
    t_sampling_terms(w, c, max_hop, fanout, alpha).total()
}

/// Minimum `C / B_external` at which preloading beats the baseline, under
/// `1/B_internal ≈ 0` and `1/N ≈ 0`: `(D^α·L − 1) / D`.
pub fn speedup_threshold(avg_degree: f64, d_alpha: f64, layers: usize) -> f64 {
    (d_alpha * layers as f64 - 1.0) / avg_degree
}

/// Whether the approximate speedup condition predicts preloading wins.
pub fn preload_predicted_faster(w: &WorkloadSpec, c: &ClusterSpec, m: &ModelSpec) -> bool {
    c.compute_vps / c.external_bw_vps > speedup_threshold(w.avg_degree(), m.d_alpha, m.layers)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Violation {
    /// `D^α·L ≤ 1`: preloading adds nothing to model.
    PreloadGrowthNotAboveOne { factor: f64 },
    /// `D^α·L > N_s·N_g`: the halo outgrows the worker count.
    PreloadGrowthExceedsWorkers { factor: f64, workers: usize },
    /// `m^α·k ≤ 1`.
    SamplingGrowthNotAboveOne { factor: f64 },
    /// `m^α·k ≥ D^α·L`: sampling costs at least as much as full preloading.
    SamplingExceedsPreload { sampling: f64, preload: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ValidityReport {
    pub preload_factor: f64,
    pub workers: usize,
    pub sampling_factor: Option<f64>,
    pub violations: Vec<Violation>,
}

impl ValidityReport {
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Checks `1 < D^α·L ≤ N_s·N_g` and, with sampling `(m, k, α)`,
/// `1 < m^α·k < D^α·L`.
pub fn check_validity(c: &ClusterSpec, m: &ModelSpec, sampling: Option<(usize, usize, f64)>) -> ValidityReport {
    let preload = m.d_alpha * m.layers as f64;
    let workers = c.workers();
    let mut violations = Vec::new();
    if preload <= 1.0 {
        violations.push(Violation::PreloadGrowthNotAboveOne { factor: preload });
    }
    if preload > workers as f64 {
        violations.push(Violation::PreloadGrowthExceedsWorkers { factor: preload, workers });
    }
    let sampling_factor = sampling.map(|(hop, fanout, alpha)| sampling_factor(hop, fanout, alpha));
    if let Some(s) = sampling_factor {
        if s <= 1.0 {
            violations.push(Violation::SamplingGrowthNotAboveOne { factor: s });
        }
        if s >= preload {
            violations.push(Violation::SamplingExceedsPreload { sampling: s, preload });
        }
    }
    ValidityReport {
        preload_factor: preload,
        workers,
        sampling_factor,
        violations,
    }
}

/// Smallest layer count at which shared preloading becomes slower than the
/// baseline, if any within `MAX_CROSSOVER_LAYERS`.
pub fn crossover_layer(w: &WorkloadSpec, c: &ClusterSpec, d_alpha: f64) -> Option<usize> {
    let baseline = t_prev(w, c);
    (1..=MAX_CROSSOVER_LAYERS).find(|&layers| {
        let m = ModelSpec {
            layers,
            hidden_dim: 1,
            feature_dim: 1,
            d_alpha,
        };
        t_preload(w, c, &m) > baseline
    })
}
