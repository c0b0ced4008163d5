use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

#[derive(Debug, Parser)]
#[command(name = "depsim", version, about = "Partition, extract, plan and simulate multi-server GNN training")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate a synthetic graph as an edge list.
    Gen(GenArgs),
    /// Partition a graph across servers and their GPUs.
    Partition(PartitionArgs),
    /// Dump per-server dependency subgraphs.
    Extract(ExtractArgs),
    /// Plan cooperative (or per-GPU baseline) batches under a memory budget.
    Plan(PlanArgs),
    /// Simulate one training epoch and write the per-GPU breakdown CSV.
    Simulate(RunArgs),
    /// Check server-local evaluation against the full-graph forward pass.
    Validate(RunArgs),
    /// Analytic model, partition quality and strategy comparison as JSON.
    Report(RunArgs),
    /// Evaluate a parameter grid from the config file into one CSV.
    Sweep(RunArgs),
}

/// Flags shared by every command. Unset flags fall back to the config file,
/// then to built-in defaults.
#[derive(Debug, Clone, Default, Args)]
pub struct RunArgs {
    /// JSON run configuration.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Edge-list file.
    #[arg(long)]
    pub graph: Option<PathBuf>,
    /// Treat the edge list as directed (`u v` means v depends on u).
    #[arg(long)]
    pub directed: bool,
    /// Partition file.
    #[arg(long)]
    pub partition: Option<PathBuf>,
    /// Cluster spec JSON.
    #[arg(long)]
    pub cluster: Option<PathBuf>,
    #[arg(long)]
    pub layers: Option<usize>,
    #[arg(long)]
    pub hidden: Option<usize>,
    #[arg(long)]
    pub feature_dim: Option<usize>,
    #[arg(long)]
    pub d_alpha: Option<f64>,
    /// full-graph, preload, preload-eas or cobatch.
    #[arg(long)]
    pub strategy: Option<String>,
    /// External max-hop of boundary sampling.
    #[arg(long)]
    pub max_hop: Option<usize>,
    /// External fanout of boundary sampling: a count or `unlimited`.
    #[arg(long)]
    pub fanout: Option<String>,
    /// Per-GPU memory budget in bytes.
    #[arg(long)]
    pub mem_budget: Option<u64>,
    /// Explicit batch count, instead of a memory budget.
    #[arg(long)]
    pub batches: Option<usize>,
    #[arg(long, env = "GRANNDIS_SIM_SEED")]
    pub seed: Option<u64>,
    /// Output path; stdout when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Backward-pass multiplier on compute and per-layer fetches.
    #[arg(long)]
    pub backward_multiplier: Option<f64>,
    /// Expose gradient sync beyond this per-step overlap window (seconds).
    #[arg(long)]
    pub sync_overlap: Option<f64>,
    /// Charge the one-time feature preload to this epoch.
    #[arg(long)]
    pub first_epoch: bool,
}

#[derive(Debug, Args)]
pub struct GenArgs {
    #[command(flatten)]
    pub run: RunArgs,
    #[arg(long)]
    pub n: Option<usize>,
    #[arg(long)]
    pub avg_degree: Option<f64>,
    /// Planted-partition block count; switches to the planted generator.
    #[arg(long)]
    pub blocks: Option<usize>,
    #[arg(long)]
    pub p_in: Option<f64>,
    #[arg(long)]
    pub p_out: Option<f64>,
}

#[derive(Debug, Args)]
pub struct PartitionArgs {
    #[command(flatten)]
    pub run: RunArgs,
    #[arg(long)]
    pub servers: Option<usize>,
    /// GPUs per server.
    #[arg(long)]
    pub gpus: Option<usize>,
    /// mincut or random.
    #[arg(long)]
    pub mode: Option<String>,
    #[arg(long)]
    pub epsilon: Option<f64>,
}

#[derive(Debug, Args)]
pub struct ExtractArgs {
    #[command(flatten)]
    pub run: RunArgs,
    /// Only this server; all servers when absent.
    #[arg(long)]
    pub server: Option<usize>,
}

#[derive(Debug, Args)]
pub struct PlanArgs {
    #[command(flatten)]
    pub run: RunArgs,
    /// Plan per-GPU split-then-fetch batches instead of cooperative ones.
    #[arg(long)]
    pub baseline: bool,
}
