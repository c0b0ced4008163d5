//! Run configuration: JSON file merged under command-line flags.

use std::path::{Path, PathBuf};

use depsim_core::cost::ClusterSpec;
use depsim_core::{Error, Fanout, ModelSpec, Result, SamplingConfig};
use serde::Deserialize;

use crate::args::RunArgs;

pub const DEFAULT_LAYERS: usize = 3;
pub const DEFAULT_HIDDEN: usize = 64;
pub const DEFAULT_FEATURE_DIM: usize = 16;
pub const DEFAULT_D_ALPHA: f64 = 1.5;

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(rename_all = "kebab-case", deny_unknown_fields)]
pub struct FileConfig {
    pub graph: Option<PathBuf>,
    pub generate: Option<GeneratorSpec>,
    #[serde(default)]
    pub directed: bool,
    pub partition: Option<PathBuf>,
    pub cluster: Option<ClusterSource>,
    pub layers: Option<usize>,
    pub hidden: Option<usize>,
    pub feature_dim: Option<usize>,
    pub d_alpha: Option<f64>,
    pub strategy: Option<String>,
    pub max_hop: Option<usize>,
    pub fanout: Option<FanoutValue>,
    pub mem_budget: Option<u64>,
    pub batches: Option<usize>,
    pub seed: Option<u64>,
    pub out: Option<PathBuf>,
    pub servers: Option<usize>,
    pub gpus: Option<usize>,
    pub mode: Option<String>,
    pub epsilon: Option<f64>,
    pub backward_multiplier: Option<f64>,
    pub sync_overlap: Option<f64>,
    #[serde(default)]
    pub first_epoch: bool,
    pub grid: Option<Grid>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(rename_all = "kebab-case", deny_unknown_fields)]
pub struct GeneratorSpec {
    pub n: Option<usize>,
    pub avg_degree: Option<f64>,
    pub blocks: Option<usize>,
    pub p_in: Option<f64>,
    pub p_out: Option<f64>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
pub enum ClusterSource {
    Path(PathBuf),
    Inline(ClusterSpec),
}

#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
pub enum FanoutValue {
    Count(usize),
    Text(String),
}

impl FanoutValue {
    fn resolve(&self) -> Result<Fanout> {
        match self {
            FanoutValue::Count(k) => Ok(Fanout::Limited(*k)),
            FanoutValue::Text(t) => t.parse(),
        }
    }
}

/// Sweep axes; an absent axis keeps the base value.
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(rename_all = "kebab-case", deny_unknown_fields)]
pub struct Grid {
    pub layers: Option<Vec<usize>>,
    pub hidden: Option<Vec<usize>>,
    pub strategy: Option<Vec<String>>,
    pub max_hop: Option<Vec<usize>>,
    pub fanout: Option<Vec<FanoutValue>>,
    pub external_bw: Option<Vec<f64>>,
}

impl Grid {
    pub fn fanouts(&self) -> Result<Option<Vec<Fanout>>> {
        self.fanout
            .as_ref()
            .map(|v| v.iter().map(FanoutValue::resolve).collect())
            .transpose()
    }
}

pub fn load_file(path: &Path) -> Result<FileConfig> {
    let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })?;
    serde_json::from_str(&text).map_err(|e| Error::Parse {
        path: path.to_path_buf(),
        line: e.line(),
        message: e.to_string(),
    })
}

/// Flags and file merged; every getter applies flag > file > default.
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub flags: RunArgs,
    pub file: FileConfig,
}

impl RunConfig {
    pub fn new(flags: RunArgs) -> Result<Self> {
        let file = match &flags.config {
            Some(p) => load_file(p)?,
            None => FileConfig::default(),
        };
        if file.graph.is_some() && file.generate.is_some() {
            return Err(Error::Input("config sets both 'graph' and 'generate'".into()));
        }
        if flags.mem_budget.is_some() && flags.batches.is_some()
            || flags.mem_budget.is_none() && flags.batches.is_none() && file.mem_budget.is_some() && file.batches.is_some()
        {
            return Err(Error::Input("set either a memory budget or a batch count, not both".into()));
        }
        Ok(RunConfig { flags, file })
    }

    pub fn graph_path(&self) -> Option<&Path> {
        self.flags.graph.as_deref().or(self.file.graph.as_deref())
    }

    pub fn directed(&self) -> bool {
        self.flags.directed || self.file.directed
    }

    pub fn partition_path(&self) -> Result<&Path> {
        self.flags
            .partition
            .as_deref()
            .or(self.file.partition.as_deref())
            .ok_or_else(|| Error::Input("missing --partition".into()))
    }

    pub fn cluster(&self) -> Result<ClusterSpec> {
        if let Some(p) = &self.flags.cluster {
            return ClusterSpec::load(p);
        }
        match &self.file.cluster {
            Some(ClusterSource::Path(p)) => ClusterSpec::load(p),
            Some(ClusterSource::Inline(c)) => {
                c.validate()?;
                Ok(*c)
            }
            None => Err(Error::Input("missing --cluster".into())),
        }
    }

    pub fn has_cluster(&self) -> bool {
        self.flags.cluster.is_some() || self.file.cluster.is_some()
    }

    pub fn layers(&self) -> usize {
        self.flags.layers.or(self.file.layers).unwrap_or(DEFAULT_LAYERS)
    }

    pub fn feature_dim(&self) -> usize {
        self.flags.feature_dim.or(self.file.feature_dim).unwrap_or(DEFAULT_FEATURE_DIM)
    }

    pub fn model(&self) -> Result<ModelSpec> {
        let m = ModelSpec {
            layers: self.layers(),
            hidden_dim: self.flags.hidden.or(self.file.hidden).unwrap_or(DEFAULT_HIDDEN),
            feature_dim: self.feature_dim(),
            d_alpha: self.flags.d_alpha.or(self.file.d_alpha).unwrap_or(DEFAULT_D_ALPHA),
        };
        m.validate()?;
        Ok(m)
    }

    pub fn strategy_name(&self) -> &str {
        self.flags
            .strategy
            .as_deref()
            .or(self.file.strategy.as_deref())
            .unwrap_or("full-graph")
    }

    pub fn seed(&self) -> u64 {
        self.flags.seed.or(self.file.seed).unwrap_or(0)
    }

    fn fanout(&self) -> Result<Option<Fanout>> {
        match (&self.flags.fanout, &self.file.fanout) {
            (Some(f), _) => f.parse().map(Some),
            (None, Some(f)) => f.resolve().map(Some),
            (None, None) => Ok(None),
        }
    }

    /// Boundary sampling, if any sampling parameter was set.
    pub fn explicit_sampling(&self) -> Result<Option<SamplingConfig>> {
        let max_hop = self.flags.max_hop.or(self.file.max_hop);
        let fanout = self.fanout()?;
        if max_hop.is_none() && fanout.is_none() {
            return Ok(None);
        }
        let d = SamplingConfig::default();
        Ok(Some(SamplingConfig::new(
            max_hop.unwrap_or(d.max_hop),
            fanout.unwrap_or(d.fanout),
            self.seed(),
        )))
    }

    /// Boundary sampling with the default `m = 1`, `k = 15` filled in.
    pub fn sampling(&self) -> Result<SamplingConfig> {
        Ok(self
            .explicit_sampling()?
            .unwrap_or(SamplingConfig { seed: self.seed(), ..SamplingConfig::default() }))
    }

    pub fn mem_budget(&self) -> Option<u64> {
        self.flags.mem_budget.or(if self.flags.batches.is_some() { None } else { self.file.mem_budget })
    }

    pub fn batches(&self) -> Option<usize> {
        self.flags.batches.or(if self.flags.mem_budget.is_some() { None } else { self.file.batches })
    }

    pub fn out(&self) -> Option<&Path> {
        self.flags.out.as_deref().or(self.file.out.as_deref())
    }

    pub fn backward_multiplier(&self) -> Option<f64> {
        self.flags.backward_multiplier.or(self.file.backward_multiplier)
    }

    pub fn sync_overlap(&self) -> Option<f64> {
        self.flags.sync_overlap.or(self.file.sync_overlap)
    }

    pub fn first_epoch(&self) -> bool {
        self.flags.first_epoch || self.file.first_epoch
    }
}
