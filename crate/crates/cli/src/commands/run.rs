use instasel::eval::{markdown_table, write_reports_csv};
use instasel::graph::Catalog;
use instasel::pipeline::Experiment;
use instasel::{Algorithm, FeatureMatrix, Schema, TestbedSplit};

use super::features::{extract_catalog, extract_options};
use super::testbed::{build_split, load_perf, parse_testbed};
use super::{check_output, create_dir, parse_list, write_file};
use crate::args::RunArgs;
use crate::config::{require, Settings};
use crate::error::{CliError, CliResult};

fn load_features(args: &RunArgs, settings: &Settings) -> CliResult<FeatureMatrix> {
    let file = &settings.file;
    if let Some(path) = args.features.clone().or_else(|| file.features.clone()) {
        return Ok(FeatureMatrix::load(path)?);
    }
    let graphs = args.inputs.graphs.clone().or_else(|| file.graphs.clone()).ok_or_else(|| {
        CliError::usage("missing --features (or --graphs with --schema to extract them)")
    })?;
    let schema_text = require(args.schema.clone(), file.schema.as_ref().map(|s| s.joined()), "schema")?;
    let schemas: Vec<Schema> = parse_list(&schema_text, "schema")?;
    let [schema] = schemas[..] else {
        return Err(CliError::usage("run takes exactly one --schema"));
    };
    let catalog = Catalog::load(graphs)?;
    log::info!("extracting {schema} features for {} graphs", catalog.entries.len());
    let (mut matrices, failed) = extract_catalog(&catalog, &[schema], &extract_options(None, settings)?)?;
    if failed > 0 {
        return Err(CliError::data(format!("{failed} graph(s) could not be read")));
    }
    Ok(matrices.remove(0))
}

pub fn run(args: RunArgs, settings: &Settings) -> CliResult<()> {
    let file = &settings.file;
    let out = require(args.out.clone(), file.out.clone(), "out")?;
    let (csv_path, md_path) = (out.join("report.csv"), out.join("report.md"));
    check_output(&csv_path, args.force)?;
    check_output(&md_path, args.force)?;
    let seed = settings.require_seed("selectors and folds are seeded")?;
    let algo_text = require(args.algorithms.clone(), file.algorithms.as_ref().map(|s| s.joined()), "algorithms")?;
    let algorithms: Vec<Algorithm> = parse_list(&algo_text, "algorithm")?;

    let saved = match &args.split {
        Some(path) => Some(TestbedSplit::load(path)?),
        None => None,
    };
    let testbed = match &saved {
        Some(s) => s.testbed,
        None => parse_testbed(&args.inputs, settings)?,
    };
    let data = load_perf(&args.inputs, testbed, settings)?;
    let split = match saved {
        Some(s) => s,
        None => build_split(&args.inputs, testbed, &data, settings)?,
    };
    let features = load_features(&args, settings)?;
    let config = settings.selector_config();

    log::info!(
        "running {} algorithm(s) on {testbed} ({} folds, {} graphs, {} models)",
        algorithms.len(),
        split.folds.len(),
        features.graph_ids.len(),
        data.perf.n_models()
    );
    let reports = Experiment {
        features: &features,
        perf: &data.perf,
        target_perf: data.target_perf.as_ref(),
        split: &split,
        config: &config,
        seed,
    }
    .run(&algorithms)?;

    let mut csv = Vec::new();
    write_reports_csv(&reports, &mut csv)?;
    create_dir(&out)?;
    write_file(&csv_path, &String::from_utf8(csv).expect("csv is utf-8"))?;
    write_file(&md_path, &markdown_table(&reports))?;
    log::info!("wrote {} and {}", csv_path.display(), md_path.display());
    Ok(())
}
