//! Cartesian parameter sweep. Rows follow the axis order external bandwidth,
//! layers, hidden, strategy, max-hop, fanout; a failing point becomes a row
//! with its error category and the sweep continues.

use std::fmt::Write as _;

use depsim_core::extract::{extract_full, extract_sampled};
use depsim_core::sim::simulate_epoch;
use depsim_core::{Error, Graph, HierarchicalPartition, ModelSpec, Result, Strategy};

use crate::args::RunArgs;
use crate::commands::{build_strategy, load_graph, load_hierarchy, sim_options, write_output};
use crate::config::RunConfig;

pub const SWEEP_HEADER: &str = "external_bw_vps,layers,hidden,strategy,max_hop,fanout,halo_vertices,compute_s,internal_s,external_s,sync_s,total_s,status";

fn axis<T: Clone>(name: &str, values: Option<&Vec<T>>, base: T) -> Result<Vec<T>> {
    match values {
        Some(v) if v.is_empty() => Err(Error::Input(format!("grid axis '{name}' is empty"))),
        Some(v) => Ok(v.clone()),
        None => Ok(vec![base]),
    }
}

/// Halo vertices summed over servers for the dependency set a strategy uses.
fn halo_vertices(g: &Graph, h: &HierarchicalPartition, layers: usize, strat: &Strategy, cfg: &RunConfig) -> Result<usize> {
    let mut total = 0;
    for s in 0..h.num_servers() {
        total += match strat {
            Strategy::FullGraph => 0,
            Strategy::SharedPreload => extract_full(g, &h.servers, s, layers)?.halo().len(),
            Strategy::PreloadEas(c) => extract_sampled(g, &h.servers, s, c)?.halo().len(),
            Strategy::Cobatch(_) => match cfg.explicit_sampling()? {
                Some(c) => extract_sampled(g, &h.servers, s, &c)?.halo().len(),
                None => extract_full(g, &h.servers, s, layers)?.halo().len(),
            },
        };
    }
    Ok(total)
}

pub fn cmd_sweep(a: RunArgs) -> Result<()> {
    let cfg = RunConfig::new(a)?;
    let grid = cfg
        .file
        .grid
        .clone()
        .ok_or_else(|| Error::Input("sweep needs a 'grid' object in --config".into()))?;
    let g = load_graph(&cfg)?;
    let h = load_hierarchy(&cfg, &g)?;
    let cluster = cfg.cluster()?;
    let base_model = cfg.model()?;
    let base_sampling = cfg.sampling()?;

    let bws = axis("external-bw", grid.external_bw.as_ref(), cluster.external_bw_vps)?;
    let layers = axis("layers", grid.layers.as_ref(), base_model.layers)?;
    let hidden = axis("hidden", grid.hidden.as_ref(), base_model.hidden_dim)?;
    let strategies = axis("strategy", grid.strategy.as_ref(), cfg.strategy_name().to_string())?;
    let hops = axis("max-hop", grid.max_hop.as_ref(), base_sampling.max_hop)?;
    let fanouts = axis("fanout", grid.fanouts()?.as_ref(), base_sampling.fanout)?;
    let opts = sim_options(&cfg);

    let mut out = String::from(SWEEP_HEADER);
    out.push('\n');
    for &bw in &bws {
        let mut c = cluster;
        c.external_bw_vps = bw;
        for &l in &layers {
            for &hd in &hidden {
                let model = ModelSpec {
                    layers: l,
                    hidden_dim: hd,
                    ..base_model
                };
                for name in &strategies {
                    for &m in &hops {
                        for &k in &fanouts {
                            let mut point = cfg.clone();
                            // Sampling stays implicit unless the grid sweeps it.
                            if grid.max_hop.is_some() {
                                point.flags.max_hop = Some(m);
                            }
                            if grid.fanout.is_some() {
                                point.flags.fanout = Some(k.to_string());
                            }
                            point.flags.layers = Some(l);
                            point.flags.hidden = Some(hd);
                            let _ = write!(out, "{bw},{l},{hd},{name},{m},{k},");
                            out.push_str(&evaluate(&point, &g, &h, &c, &model, name, &opts));
                            out.push('\n');
                        }
                    }
                }
            }
        }
    }
    write_output(cfg.out(), &out)
}

fn evaluate(
    cfg: &RunConfig,
    g: &Graph,
    h: &HierarchicalPartition,
    c: &depsim_core::ClusterSpec,
    model: &ModelSpec,
    name: &str,
    opts: &depsim_core::SimOptions,
) -> String {
    let run = || -> Result<String> {
        c.validate()?;
        model.validate()?;
        let strat = build_strategy(name, cfg, g, h, model, c)?;
        let halo = halo_vertices(g, h, model.layers, &strat, cfg)?;
        let b = simulate_epoch(g, h, c, model, &strat, opts)?;
        let a = &b.aggregate;
        Ok(format!(
            "{halo},{},{},{},{},{},ok",
            a.compute_s, a.internal_comm_s, a.external_comm_s, a.grad_sync_s, a.total_s
        ))
    };
    run().unwrap_or_else(|e| format!(",,,,,,error:{}", e.category()))
}
