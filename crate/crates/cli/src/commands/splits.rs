use instasel::graph::Catalog;
use instasel::split::{generate_edge_split, generate_node_split};
use rayon::prelude::*;

use super::{check_output, create_dir};
use crate::args::{SplitKind, SplitsArgs};
use crate::config::{require, Settings};
use crate::error::{CliError, CliResult};

pub fn run(args: SplitsArgs, settings: &Settings) -> CliResult<()> {
    let graphs = require(args.graphs, settings.file.graphs.clone(), "graphs")?;
    let out = require(args.out, settings.file.out.clone(), "out")?;
    let seed = settings.require_seed("splits are random")?;
    let catalog = Catalog::load(&graphs)?;
    let node = matches!(args.kind, SplitKind::Node | SplitKind::Both);
    let edge = matches!(args.kind, SplitKind::Edge | SplitKind::Both);
    for e in &catalog.entries {
        if node {
            check_output(&out.join(format!("{}.node_split.csv", e.graph_id)), args.force)?;
        }
        if edge {
            check_output(&out.join(format!("{}.edge_split.csv", e.graph_id)), args.force)?;
        }
    }
    create_dir(&out)?;

    let failures: Vec<String> = catalog
        .entries
        .par_iter()
        .filter_map(|entry| {
            let result = catalog.load_graph(entry).and_then(|g| {
                if node {
                    generate_node_split(&g, seed)?.save(out.join(format!("{}.node_split.csv", entry.graph_id)))?;
                }
                if edge {
                    generate_edge_split(&g, seed)?.save(out.join(format!("{}.edge_split.csv", entry.graph_id)))?;
                }
                Ok(())
            });
            result.err().map(|e| {
                log::error!("graph {}: {e}", entry.graph_id);
                entry.graph_id.clone()
            })
        })
        .collect();
    if !failures.is_empty() {
        return Err(CliError::data(format!("no splits for {} graph(s): {}", failures.len(), failures.join(", "))));
    }
    log::info!("wrote splits for {} graphs to {}", catalog.entries.len(), out.display());
    Ok(())
}
