use std::path::Path;

use instasel::graph::Catalog;
use instasel::perf::load_model_catalog;
use instasel::testbeds::{
    cross_task_split, fully_observed_splits, out_of_domain_splits, small_to_large_split, sparse_testbed, DEFAULT_EPSILON,
    SPARSITY_GRID,
};
use instasel::{PerformanceMatrix, Testbed, TestbedSplit};

use super::check_output;
use crate::args::{TestbedArgs, TestbedInputs};
use crate::config::{require, Settings};
use crate::error::{CliError, CliResult};

/// Performance data behind a testbed.
pub struct PerfInputs {
    pub perf: PerformanceMatrix,
    /// Present for cross_task only.
    pub target_perf: Option<PerformanceMatrix>,
}

pub fn parse_testbed(inputs: &TestbedInputs, settings: &Settings) -> CliResult<Testbed> {
    let name = require(inputs.testbed.clone(), settings.file.testbed.clone(), "testbed")?;
    name.parse().map_err(|e: instasel::Error| CliError::usage(e.to_string()))
}

pub fn load_perf(inputs: &TestbedInputs, testbed: Testbed, settings: &Settings) -> CliResult<PerfInputs> {
    let file = &settings.file;
    let perf = PerformanceMatrix::load(require(inputs.perf.clone(), file.perf.clone(), "perf")?)?;
    let target_perf = if testbed == Testbed::CrossTask {
        let path = require(inputs.target_perf.clone(), file.target_perf.clone(), "target-perf")?;
        Some(PerformanceMatrix::load(path)?)
    } else {
        None
    };
    Ok(PerfInputs { perf, target_perf })
}

fn sparsity(inputs: &TestbedInputs, settings: &Settings) -> CliResult<f64> {
    let p = require(inputs.sparsity, settings.file.sparsity, "sparsity")?;
    if !(p > 0.0 && p <= 1.0) {
        return Err(CliError::usage(format!("--sparsity must lie in (0, 1], got {p}")));
    }
    if !SPARSITY_GRID.iter().any(|g| (g - p).abs() < 1e-9) {
        log::warn!("sparsity {p} is outside the standard grid {SPARSITY_GRID:?}");
    }
    Ok(p)
}

fn model_catalog(path: Option<&Path>) -> CliResult<Vec<instasel::ModelConfig>> {
    Ok(match path {
        Some(p) => load_model_catalog(p)?,
        None => Vec::new(),
    })
}

/// Generates the folds of `testbed` from the flags.
pub fn build_split(inputs: &TestbedInputs, testbed: Testbed, data: &PerfInputs, settings: &Settings) -> CliResult<TestbedSplit> {
    let file = &settings.file;
    let catalog = || -> CliResult<Catalog> { Ok(Catalog::load(require(inputs.graphs.clone(), file.graphs.clone(), "graphs")?)?) };
    let split = match testbed {
        Testbed::FullyObserved => fully_observed_splits(&catalog()?.entries, settings.require_seed("folds are shuffled")?)?,
        Testbed::Sparse => {
            let p = sparsity(inputs, settings)?;
            sparse_testbed(&catalog()?.entries, &data.perf, p, settings.require_seed("folds and masks are random")?)?
        }
        Testbed::OutOfDomain => out_of_domain_splits(&catalog()?.entries, settings.require_seed("domains are shuffled")?)?,
        Testbed::SmallToLarge => {
            let eps = inputs.epsilon.or(file.epsilon).unwrap_or(DEFAULT_EPSILON);
            small_to_large_split(&catalog()?.entries, eps)?
        }
        Testbed::CrossTask => {
            let target = data.target_perf.as_ref().expect("loaded for cross_task");
            let src = model_catalog(inputs.source_models.as_deref().or(file.source_models.as_deref()))?;
            let tgt = model_catalog(inputs.target_models.as_deref().or(file.target_models.as_deref()))?;
            cross_task_split(&data.perf, &src, target, &tgt)?
        }
    };
    Ok(split)
}

pub fn run(args: TestbedArgs, settings: &Settings) -> CliResult<()> {
    let out = require(args.out, settings.file.out.clone(), "out")?;
    check_output(&out, args.force)?;
    let testbed = parse_testbed(&args.inputs, settings)?;
    let data = load_perf(&args.inputs, testbed, settings)?;
    let split = build_split(&args.inputs, testbed, &data, settings)?;
    if let Some(dir) = out.parent().filter(|d| !d.as_os_str().is_empty()) {
        super::create_dir(dir)?;
    }
    split.save(&out)?;
    log::info!("wrote {} split with {} fold(s) to {}", testbed, split.folds.len(), out.display());
    Ok(())
}
