use std::path::PathBuf;

use instasel::graph::Catalog;
use instasel::metafeat::orbits::OrbitMode;
use instasel::metafeat::{ExtractOptions, Structure};
use instasel::{FeatureMatrix, MetaFeatureVector, Schema};
use rayon::prelude::*;

use super::{check_output, create_dir, parse_list};
use crate::args::FeaturesArgs;
use crate::config::{require, Settings};
use crate::error::{CliError, CliResult};

/// Feature matrices for `schemas`, plus the number of graphs that failed to load.
/// Rows follow catalog order whatever the thread count.
pub fn extract_catalog(catalog: &Catalog, schemas: &[Schema], options: &ExtractOptions) -> CliResult<(Vec<FeatureMatrix>, usize)> {
    let per_graph: Vec<Option<Vec<MetaFeatureVector>>> = catalog
        .entries
        .par_iter()
        .map(|entry| match catalog.load_graph(entry) {
            Ok(g) => {
                let structure = Structure::extract(&g, options);
                Some(schemas.iter().map(|&s| structure.features(&g, s).0).collect())
            }
            Err(e) => {
                log::error!("graph {}: {e}", entry.graph_id);
                None
            }
        })
        .collect();
    let failed = per_graph.iter().filter(|r| r.is_none()).count();
    let mut columns: Vec<Vec<MetaFeatureVector>> = vec![Vec::new(); schemas.len()];
    for vectors in per_graph.into_iter().flatten() {
        for (col, v) in columns.iter_mut().zip(vectors) {
            col.push(v);
        }
    }
    let matrices = schemas
        .iter()
        .zip(columns)
        .map(|(&s, vecs)| FeatureMatrix::from_vectors(s, vecs))
        .collect::<instasel::Result<Vec<_>>>()?;
    Ok((matrices, failed))
}

pub fn extract_options(orbit_cap: Option<usize>, settings: &Settings) -> CliResult<ExtractOptions> {
    let orbit_mode = match orbit_cap {
        Some(cap) => OrbitMode::Sampled {
            cap,
            seed: settings.require_seed("sampled orbit counts")?,
        },
        None => OrbitMode::Exact,
    };
    Ok(ExtractOptions {
        orbit_mode,
        ..ExtractOptions::default()
    })
}

pub fn run(args: FeaturesArgs, settings: &Settings) -> CliResult<()> {
    let file = &settings.file;
    let graphs = require(args.graphs, file.graphs.clone(), "graphs")?;
    let out = require(args.out, file.out.clone(), "out")?;
    let schema_list = args
        .schema
        .or_else(|| file.schema.as_ref().map(|s| s.joined()))
        .unwrap_or_else(|| Schema::Compact.as_str().to_string());
    let schemas: Vec<Schema> = parse_list(&schema_list, "schema")?;
    let paths: Vec<PathBuf> = schemas.iter().map(|s| out.join(format!("{s}.csv"))).collect();
    for p in &paths {
        check_output(p, args.force)?;
    }
    let options = extract_options(args.orbit_cap, settings)?;

    let catalog = Catalog::load(&graphs)?;
    log::info!("extracting {} schema(s) for {} graphs", schemas.len(), catalog.entries.len());
    let (matrices, failed) = extract_catalog(&catalog, &schemas, &options)?;
    create_dir(&out)?;
    for (m, p) in matrices.iter().zip(&paths) {
        m.save(p)?;
        log::info!("wrote {} ({} x {})", p.display(), m.graph_ids.len(), m.dim());
    }
    if failed > 0 {
        return Err(CliError::data(format!("{failed} of {} graphs could not be read", catalog.entries.len())));
    }
    Ok(())
}
