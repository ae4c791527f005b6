//! Fits selectors on testbed folds and evaluates them on the held-out graphs.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::eval::{EvaluationReport, GraphResult};
use crate::features::FeatureMatrix;
use crate::linalg::Matrix;
use crate::perf::PerformanceMatrix;
use crate::rng;
use crate::selectors::{Algorithm, SelectorConfig, SelectorModel, TrainCorpus};
use crate::testbeds::{Testbed, TestbedSplit};

/// Inputs shared by every (algorithm, fold) job.
pub struct Experiment<'a> {
    pub features: &'a FeatureMatrix,
    /// Training performances (the source task for cross-task).
    pub perf: &'a PerformanceMatrix,
    /// Target-task performances for cross-task; otherwise the test rows come from `perf`.
    pub target_perf: Option<&'a PerformanceMatrix>,
    pub split: &'a TestbedSplit,
    pub config: &'a SelectorConfig,
    pub seed: u64,
}

fn columns(perf: &PerformanceMatrix, ids: impl Iterator<Item = String>) -> Result<Vec<usize>> {
    ids.map(|id| perf.model_index(&id).ok_or_else(|| Error::invalid(format!("unknown model {id}"))))
        .collect()
}

fn rows(perf: &PerformanceMatrix, ids: &[String], what: &str) -> Result<Vec<usize>> {
    ids.iter()
        .map(|id| perf.graph_index(id).ok_or_else(|| Error::invalid(format!("{what} graph {id} has no performance row"))))
        .collect()
}

fn feature_rows(features: &FeatureMatrix, ids: &[String]) -> Result<Matrix> {
    let index = features.index_of();
    let idx = ids
        .iter()
        .map(|id| {
            index
                .get(id.as_str())
                .copied()
                .ok_or_else(|| Error::invalid(format!("no meta-features for graph {id}")))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(features.values.select_rows(&idx))
}

/// A fold's training corpus and its fully observed test rows.
pub struct FoldData {
    pub corpus: TrainCorpus,
    pub test_ids: Vec<String>,
    pub test_features: Matrix,
    pub test_perf: PerformanceMatrix,
}

impl Experiment<'_> {
    fn train_columns(&self) -> Result<Option<(Vec<usize>, Vec<usize>)>> {
        let Some(alignment) = &self.split.model_alignment else {
            return Ok(None);
        };
        let target = self.target_perf.unwrap_or(self.perf);
        let src = columns(self.perf, alignment.iter().map(|(s, _)| s.clone()))?;
        let tgt = columns(target, alignment.iter().map(|(_, t)| t.clone()))?;
        Ok(Some((src, tgt)))
    }

    pub fn fold_data(&self, k: usize) -> Result<FoldData> {
        let fold = self
            .split
            .folds
            .get(k)
            .ok_or_else(|| Error::invalid(format!("fold {k} does not exist")))?;
        let target = self.target_perf.unwrap_or(self.perf);
        let cols = self.train_columns()?;
        let all_src: Vec<usize> = (0..self.perf.n_models()).collect();
        let all_tgt: Vec<usize> = (0..target.n_models()).collect();
        let (src_cols, tgt_cols) = cols.as_ref().map_or((&all_src, &all_tgt), |(s, t)| (s, t));

        let train_rows = rows(self.perf, &fold.train_ids, "training")?;
        let mut train_perf = self.perf.select(&train_rows, src_cols);
        if let Some(mask) = &fold.train_mask {
            let mut bits = train_perf.mask().to_vec();
            let m = train_perf.n_models();
            let mask_cols = columns(self.perf, self.split.model_ids.iter().cloned())?;
            for (r, id) in fold.train_ids.iter().enumerate() {
                let row = mask
                    .get(id)
                    .ok_or_else(|| Error::Protocol(format!("fold {k}: no training mask for graph {id}")))?;
                for (c, &src_col) in src_cols.iter().enumerate() {
                    if let Some(pos) = mask_cols.iter().position(|&mc| mc == src_col) {
                        bits[r * m + c] &= row[pos];
                    }
                }
            }
            train_perf = train_perf.with_mask(bits)?;
        }
        let corpus = TrainCorpus::new(feature_rows(self.features, &fold.train_ids)?, train_perf)
            .map(|mut c| {
                c.schema = Some(self.features.schema);
                c
            })?;

        let test_rows = rows(target, &fold.test_ids, "test")?;
        let test_perf = target.select(&test_rows, tgt_cols);
        for (r, id) in fold.test_ids.iter().enumerate() {
            if test_perf.full_row(r).is_none() {
                return Err(Error::Protocol(format!(
                    "testbed {}, fold {k}: test graph {id} has unobserved performances",
                    self.split.testbed
                )));
            }
        }
        Ok(FoldData {
            corpus,
            test_ids: fold.test_ids.clone(),
            test_features: feature_rows(self.features, &fold.test_ids)?,
            test_perf,
        })
    }

    fn run_job(&self, algorithm: Algorithm, k: usize, data: &FoldData) -> Result<Vec<GraphResult>> {
        let model = SelectorModel::fit(algorithm, &data.corpus, self.config, rng::derive(self.seed, k as u64))
            .map_err(|e| with_context(e, self.split.testbed, algorithm, k))?;
        data.test_ids
            .iter()
            .enumerate()
            .map(|(r, id)| {
                let scores = model.predict(data.test_features.row(r))?;
                GraphResult::compute(k, id.clone(), &scores, data.test_perf.full_row(r).expect("checked"))
            })
            .collect()
    }

    /// One report per algorithm, in the order given. Jobs run on the current
    /// rayon pool; results are merged in (algorithm, fold) order.
    pub fn run(&self, algorithms: &[Algorithm]) -> Result<Vec<EvaluationReport>> {
        let folds = (0..self.split.folds.len()).map(|k| self.fold_data(k)).collect::<Result<Vec<_>>>()?;
        let jobs: Vec<(Algorithm, usize)> = algorithms
            .iter()
            .flat_map(|&a| (0..folds.len()).map(move |k| (a, k)))
            .collect();
        let results: Vec<Result<Vec<GraphResult>>> = jobs
            .par_iter()
            .map(|&(a, k)| {
                log::debug!("fitting {a} on {} fold {k}", self.split.testbed);
                self.run_job(a, k, &folds[k])
            })
            .collect();
        let mut reports: Vec<EvaluationReport> = algorithms
            .iter()
            .map(|a| EvaluationReport::new(self.split.testbed.as_str(), a.label(), Vec::new()))
            .collect();
        for ((a, _), res) in jobs.iter().zip(results) {
            let idx = algorithms.iter().position(|x| x == a).expect("job algorithm");
            reports[idx].results.extend(res?);
        }
        Ok(reports)
    }
}

fn with_context(e: Error, testbed: Testbed, algorithm: Algorithm, fold: usize) -> Error {
    match e {
        Error::Diverged { .. } => {
            log::error!("{algorithm} diverged on {testbed} fold {fold}");
            e
        }
        Error::InvalidInput(msg) => Error::InvalidInput(format!("{testbed} fold {fold}, {algorithm}: {msg}")),
        other => other,
    }
}
