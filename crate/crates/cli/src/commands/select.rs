use std::fmt::Write as _;
use std::io::Write as _;
use std::time::Instant;

use instasel::graph::load_edge_list;
use instasel::metafeat::extract;
use instasel::selectors::{ranking, UNOBSERVED_SCORE};
use instasel::{Algorithm, FeatureMatrix, LoadOptions, PerformanceMatrix, SelectorModel, TrainCorpus};

use super::{check_output, features::extract_options};
use crate::args::SelectArgs;
use crate::config::{require, Settings};
use crate::error::{CliError, CliResult};

fn fit(args: &SelectArgs, settings: &Settings) -> CliResult<SelectorModel> {
    let file = &settings.file;
    let features = FeatureMatrix::load(require(args.features.clone(), file.features.clone(), "features")?)?;
    let perf = PerformanceMatrix::load(require(args.perf.clone(), file.perf.clone(), "perf")?)?;
    let name = require(
        args.algorithm.clone(),
        file.algorithms.as_ref().map(|s| s.joined()),
        "algorithm",
    )?;
    let algorithm: Algorithm = name.parse().map_err(|e: instasel::Error| CliError::usage(e.to_string()))?;
    let seed = settings.require_seed("fitting a selector")?;
    let corpus = TrainCorpus::from_feature_matrix(&features, perf)?;
    let started = Instant::now();
    let model = SelectorModel::fit(algorithm, &corpus, &settings.selector_config(), seed)?;
    log::info!("fitted {algorithm} on {} graphs in {:.2?}", corpus.n(), started.elapsed());
    Ok(model)
}

/// Ranked table: every model once, best first, top-1 marked with `*`.
pub fn render_ranking(model_ids: &[String], scores: &[f64]) -> String {
    let mut s = String::from("rank\tmodel_id\tscore\ttop1\n");
    for (r, j) in ranking(scores).into_iter().enumerate() {
        let score = if scores[j] == UNOBSERVED_SCORE {
            "NA".to_string()
        } else {
            format!("{:.6}", scores[j])
        };
        let mark = if r == 0 { "*" } else { "" };
        let _ = writeln!(s, "{}\t{}\t{score}\t{mark}", r + 1, model_ids[j]);
    }
    s
}

pub fn run(args: SelectArgs, settings: &Settings) -> CliResult<()> {
    if let Some(dir) = &args.save_model {
        check_output(dir, args.force)?;
    }
    let options = LoadOptions {
        directed: args.directed,
        ..LoadOptions::default()
    };
    let query = load_edge_list(&args.query, &options)?;

    let model = match &args.model {
        Some(dir) => SelectorModel::load(dir)?,
        None => fit(&args, settings)?,
    };
    if let Some(dir) = &args.save_model {
        model.save(dir)?;
        log::info!("saved selector bundle to {}", dir.display());
    }
    let schema = model
        .schema
        .ok_or_else(|| CliError::data("selector bundle does not record its meta-feature schema"))?;

    let started = Instant::now();
    let (features, _) = extract(&query, schema, &extract_options(None, settings)?);
    let extracted = started.elapsed();
    let scores = model.predict(&features.values)?;
    log::info!(
        "query: {} nodes, {} edges; {schema} features in {extracted:.2?}, selection in {:.2?}",
        query.n(),
        query.m(),
        started.elapsed() - extracted
    );

    let table = render_ranking(&model.model_ids, &scores);
    let mut stdout = std::io::stdout().lock();
    stdout
        .write_all(table.as_bytes())
        .map_err(|e| CliError::Runtime(format!("cannot write to stdout: {e}")))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ranking_table_lists_each_model_once() {
        let ids: Vec<String> = ["a", "b", "c"].map(String::from).to_vec();
        let table = render_ranking(&ids, &[0.1, UNOBSERVED_SCORE, 0.7]);
        let lines: Vec<&str> = table.lines().collect();
        assert_eq!(lines.len(), 4);
        assert_eq!(lines[1], "1\tc\t0.700000\t*");
        assert_eq!(lines[2], "2\ta\t0.100000\t");
        assert_eq!(lines[3], "3\tb\tNA\t");
    }
}
