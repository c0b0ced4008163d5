//! Graph partitioning, dependency extraction, batch planning and an epoch
//! cost simulator for multi-server GNN training.
//!
//! All randomness is keyed by an explicit seed; equal inputs give equal outputs.

pub mod batch;
pub mod cost;
pub mod error;
pub mod extract;
pub mod gnn;
pub mod graph;
pub mod partition;
pub mod rng;
pub mod sim;

pub use batch::{Batch, BatchCount, BatchPlan, BatchStrategy};
pub use cost::{ClusterSpec, ModelSpec, WorkloadSpec};
pub use error::{Error, Result};
pub use extract::{DependencySubgraph, Extraction, Fanout, SamplingConfig};
pub use graph::{Graph, GraphStats, VertexId};
pub use partition::{CutReport, HierarchicalPartition, Partition, PartitionMode};
pub use sim::{CostBreakdown, SimOptions, Strategy};
