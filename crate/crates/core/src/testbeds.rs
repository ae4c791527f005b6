//! Train/test protocols over a graph corpus.
//!
//! A split is saved as three files: `<name>` (CSV `fold,role,graph_id`),
//! `<name>.mask.csv` (CSV `fold,graph_id,model_id` listing observed training
//! cells, sparse testbed only) and `<name>.meta.json`.

use std::collections::{BTreeMap, HashSet};
use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::CatalogEntry;
use crate::perf::{sparse_row_count, sparsify_rows_subset, ModelConfig, PerformanceMatrix};
use crate::rng;

pub const N_FOLDS: usize = 5;
pub const DEFAULT_EPSILON: usize = 10_000;
/// Sparsity levels of the benchmark grid.
pub const SPARSITY_GRID: [f64; 5] = [0.1, 0.3, 0.5, 0.7, 0.9];

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Testbed {
    FullyObserved,
    Sparse,
    OutOfDomain,
    SmallToLarge,
    CrossTask,
}

impl Testbed {
    pub const ALL: [Testbed; 5] = [
        Testbed::FullyObserved,
        Testbed::Sparse,
        Testbed::OutOfDomain,
        Testbed::SmallToLarge,
        Testbed::CrossTask,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Testbed::FullyObserved => "fully_observed",
            Testbed::Sparse => "sparse",
            Testbed::OutOfDomain => "out_of_domain",
            Testbed::SmallToLarge => "small_to_large",
            Testbed::CrossTask => "cross_task",
        }
    }
}

impl fmt::Display for Testbed {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Testbed {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Testbed::ALL
            .into_iter()
            .find(|t| t.as_str() == s.replace('-', "_"))
            .ok_or_else(|| Error::invalid(format!("unknown testbed {s:?}")))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Fold {
    pub train_ids: Vec<String>,
    pub test_ids: Vec<String>,
    /// Observed training cells per graph, over `TestbedSplit::model_ids`.
    #[serde(skip)]
    pub train_mask: Option<BTreeMap<String, Vec<bool>>>,
    pub params: BTreeMap<String, String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TestbedSplit {
    pub testbed: Testbed,
    pub folds: Vec<Fold>,
    pub seed: u64,
    /// Model columns the masks refer to; for cross-task, the target-side ids.
    pub model_ids: Vec<String>,
    /// Cross-task column alignment as (source model id, target model id).
    pub model_alignment: Option<Vec<(String, String)>>,
}

fn fold(train_ids: Vec<String>, test_ids: Vec<String>) -> Fold {
    Fold {
        train_ids,
        test_ids,
        train_mask: None,
        params: BTreeMap::new(),
    }
}

/// Assigns each graph a fold: per domain (in sorted order), a seeded shuffle
/// followed by round-robin dealing with a counter shared across domains.
fn stratified_assignment(graphs: &[CatalogEntry], seed: u64) -> Vec<Vec<String>> {
    let mut by_domain: BTreeMap<&str, Vec<&str>> = BTreeMap::new();
    for g in graphs {
        by_domain.entry(g.domain.as_str()).or_default().push(g.graph_id.as_str());
    }
    let mut r = rng::seeded(seed);
    let mut tests = vec![Vec::new(); N_FOLDS];
    let mut counter = 0;
    for ids in by_domain.values_mut() {
        ids.shuffle(&mut r);
        for id in ids.iter() {
            tests[counter % N_FOLDS].push(id.to_string());
            counter += 1;
        }
    }
    tests
}

fn complement_folds(graphs: &[CatalogEntry], tests: Vec<Vec<String>>) -> Vec<Fold> {
    tests
        .into_iter()
        .map(|test| {
            let set: HashSet<&str> = test.iter().map(String::as_str).collect();
            let train = graphs
                .iter()
                .filter(|g| !set.contains(g.graph_id.as_str()))
                .map(|g| g.graph_id.clone())
                .collect();
            fold(train, test)
        })
        .collect()
}

fn check_unique(graphs: &[CatalogEntry]) -> Result<()> {
    let mut seen = HashSet::new();
    for g in graphs {
        if !seen.insert(g.graph_id.as_str()) {
            return Err(Error::invalid(format!("duplicate graph_id {}", g.graph_id)));
        }
    }
    Ok(())
}

/// Five domain-stratified folds; every graph is tested exactly once.
pub fn fully_observed_splits(graphs: &[CatalogEntry], seed: u64) -> Result<TestbedSplit> {
    check_unique(graphs)?;
    if graphs.len() < N_FOLDS {
        return Err(Error::invalid(format!("need at least {N_FOLDS} graphs, got {}", graphs.len())));
    }
    Ok(TestbedSplit {
        testbed: Testbed::FullyObserved,
        folds: complement_folds(graphs, stratified_assignment(graphs, seed)),
        seed,
        model_ids: Vec::new(),
        model_alignment: None,
    })
}

/// The fully-observed folds with each fold's training rows thinned to
/// `max(1, round(p·m))` observations.
pub fn sparse_testbed(graphs: &[CatalogEntry], perf: &PerformanceMatrix, p: f64, seed: u64) -> Result<TestbedSplit> {
    let mut split = fully_observed_splits(graphs, seed)?;
    split.testbed = Testbed::Sparse;
    split.model_ids = perf.model_ids.clone();
    let m = perf.n_models();
    for (k, f) in split.folds.iter_mut().enumerate() {
        let rows = f
            .train_ids
            .iter()
            .map(|id| {
                perf.graph_index(id)
                    .ok_or_else(|| Error::invalid(format!("graph {id} has no performance row")))
            })
            .collect::<Result<Vec<_>>>()?;
        let thinned = sparsify_rows_subset(perf, &rows, p, rng::derive(seed, k as u64))?;
        let mask = f
            .train_ids
            .iter()
            .zip(&rows)
            .map(|(id, &i)| (id.clone(), thinned.row_mask(i).to_vec()))
            .collect();
        f.train_mask = Some(mask);
        f.params.insert("p".into(), p.to_string());
        f.params.insert("observed_per_row".into(), sparse_row_count(p, m).to_string());
    }
    Ok(split)
}

/// Domains shuffled and cut into `min(5, #domains)` contiguous groups; fold
/// `i` tests every graph of group `i`.
pub fn out_of_domain_splits(graphs: &[CatalogEntry], seed: u64) -> Result<TestbedSplit> {
    check_unique(graphs)?;
    let mut domains: Vec<&str> = graphs.iter().map(|g| g.domain.as_str()).collect();
    domains.sort_unstable();
    domains.dedup();
    if domains.len() < 2 {
        return Err(Error::invalid("out-of-domain testbed needs at least two domains"));
    }
    domains.shuffle(&mut rng::seeded(seed));
    let k = domains.len().min(N_FOLDS);
    let (base, extra) = (domains.len() / k, domains.len() % k);
    let mut folds = Vec::with_capacity(k);
    let mut start = 0;
    for i in 0..k {
        let len = base + usize::from(i < extra);
        let group: HashSet<&str> = domains[start..start + len].iter().copied().collect();
        start += len;
        let (test, train): (Vec<&CatalogEntry>, Vec<&CatalogEntry>) = graphs.iter().partition(|g| group.contains(g.domain.as_str()));
        let mut f = fold(
            train.iter().map(|g| g.graph_id.clone()).collect(),
            test.iter().map(|g| g.graph_id.clone()).collect(),
        );
        let mut names: Vec<&str> = group.into_iter().collect();
        names.sort_unstable();
        f.params.insert("test_domains".into(), names.join(";"));
        folds.push(f);
    }
    Ok(TestbedSplit {
        testbed: Testbed::OutOfDomain,
        folds,
        seed,
        model_ids: Vec::new(),
        model_alignment: None,
    })
}

/// Graphs with fewer than `epsilon` nodes train, the rest test.
pub fn small_to_large_split(graphs: &[CatalogEntry], epsilon: usize) -> Result<TestbedSplit> {
    check_unique(graphs)?;
    let (test, train): (Vec<&CatalogEntry>, Vec<&CatalogEntry>) = graphs.iter().partition(|g| g.n_nodes >= epsilon);
    if train.is_empty() || test.is_empty() {
        return Err(Error::invalid(format!(
            "small-to-large split with epsilon {epsilon} leaves {} training and {} test graphs",
            train.len(),
            test.len()
        )));
    }
    let mut f = fold(
        train.iter().map(|g| g.graph_id.clone()).collect(),
        test.iter().map(|g| g.graph_id.clone()).collect(),
    );
    f.params.insert("epsilon".into(), epsilon.to_string());
    Ok(TestbedSplit {
        testbed: Testbed::SmallToLarge,
        folds: vec![f],
        seed: 0,
        model_ids: Vec::new(),
        model_alignment: None,
    })
}

/// Key used to align models across catalogs.
fn match_keys(perf: &PerformanceMatrix, catalog: &[ModelConfig]) -> Result<Vec<String>> {
    if catalog.is_empty() {
        return Ok(perf.model_ids.clone());
    }
    let by_id: BTreeMap<&str, &ModelConfig> = catalog.iter().map(|c| (c.model_id.as_str(), c)).collect();
    perf.model_ids
        .iter()
        .map(|id| {
            by_id
                .get(id.as_str())
                .map(|c| c.match_key())
                .ok_or_else(|| Error::invalid(format!("model {id} missing from its catalog")))
        })
        .collect()
}

/// Trains on every source graph and tests on target graphs absent from the
/// source, over the models both catalogs share. An empty catalog matches
/// models by id.
pub fn cross_task_split(
    source: &PerformanceMatrix,
    source_catalog: &[ModelConfig],
    target: &PerformanceMatrix,
    target_catalog: &[ModelConfig],
) -> Result<TestbedSplit> {
    let src_keys = match_keys(source, source_catalog)?;
    let tgt_keys = match_keys(target, target_catalog)?;
    let src_by_key: BTreeMap<&str, usize> = src_keys.iter().enumerate().map(|(j, k)| (k.as_str(), j)).collect();
    let alignment: Vec<(String, String)> = tgt_keys
        .iter()
        .enumerate()
        .filter_map(|(t, k)| src_by_key.get(k.as_str()).map(|&s| (source.model_ids[s].clone(), target.model_ids[t].clone())))
        .collect();
    if alignment.is_empty() {
        return Err(Error::invalid("source and target tasks share no models"));
    }
    let src_graphs: HashSet<&str> = source.graph_ids.iter().map(String::as_str).collect();
    let test: Vec<String> = target
        .graph_ids
        .iter()
        .filter(|g| !src_graphs.contains(g.as_str()))
        .cloned()
        .collect();
    if test.is_empty() {
        return Err(Error::invalid("every target graph also appears in the source task"));
    }
    let mut f = fold(source.graph_ids.clone(), test);
    f.params.insert("shared_models".into(), alignment.len().to_string());
    if let Some(t) = source.task {
        f.params.insert("source_task".into(), t.to_string());
    }
    if let Some(t) = target.task {
        f.params.insert("target_task".into(), t.to_string());
    }
    Ok(TestbedSplit {
        testbed: Testbed::CrossTask,
        folds: vec![f],
        seed: 0,
        model_ids: alignment.iter().map(|(_, t)| t.clone()).collect(),
        model_alignment: Some(alignment),
    })
}

fn with_suffix(path: &Path, suffix: &str) -> PathBuf {
    let mut name = path.file_name().unwrap_or_default().to_os_string();
    name.push(suffix);
    path.with_file_name(name)
}

impl TestbedSplit {
    pub fn mask_path(path: &Path) -> PathBuf {
        with_suffix(path, ".mask.csv")
    }

    pub fn meta_path(path: &Path) -> PathBuf {
        with_suffix(path, ".meta.json")
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let mut w = csv::Writer::from_path(path).map_err(|e| Error::csv(path, e))?;
        w.write_record(["fold", "role", "graph_id"]).map_err(|e| Error::csv(path, e))?;
        for (k, f) in self.folds.iter().enumerate() {
            for (role, ids) in [("train", &f.train_ids), ("test", &f.test_ids)] {
                for id in ids {
                    w.write_record([k.to_string().as_str(), role, id]).map_err(|e| Error::csv(path, e))?;
                }
            }
        }
        w.flush().map_err(|e| Error::io(path, e))?;

        let mask_path = Self::mask_path(path);
        if self.folds.iter().any(|f| f.train_mask.is_some()) {
            let mut w = csv::Writer::from_path(&mask_path).map_err(|e| Error::csv(&mask_path, e))?;
            w.write_record(["fold", "graph_id", "model_id"]).map_err(|e| Error::csv(&mask_path, e))?;
            for (k, f) in self.folds.iter().enumerate() {
                let Some(mask) = &f.train_mask else { continue };
                // rows follow the training order so reloads are identical
                for id in &f.train_ids {
                    let Some(bits) = mask.get(id) else { continue };
                    for (model, _) in self.model_ids.iter().zip(bits).filter(|(_, &b)| b) {
                        w.write_record([k.to_string().as_str(), id, model]).map_err(|e| Error::csv(&mask_path, e))?;
                    }
                }
            }
            w.flush().map_err(|e| Error::io(&mask_path, e))?;
        }

        let meta = serde_json::to_string_pretty(self)?;
        let meta_path = Self::meta_path(path);
        fs::write(&meta_path, meta).map_err(|e| Error::io(&meta_path, e))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let meta_path = Self::meta_path(path);
        let text = fs::read_to_string(&meta_path).map_err(|e| Error::io(&meta_path, e))?;
        let mut split: TestbedSplit = serde_json::from_str(&text)?;

        // the CSV is authoritative for fold membership
        let mut folds: Vec<(Vec<String>, Vec<String>)> = vec![Default::default(); split.folds.len()];
        let mut r = csv::Reader::from_path(path).map_err(|e| Error::csv(path, e))?;
        for (line, rec) in r.records().enumerate() {
            let rec = rec.map_err(|e| Error::csv(path, e))?;
            let parse_err = |message: String| Error::Parse {
                path: path.to_path_buf(),
                line: line + 2,
                message,
            };
            if rec.len() != 3 {
                return Err(parse_err(format!("expected 3 fields, found {}", rec.len())));
            }
            let k: usize = rec[0].parse().map_err(|_| parse_err(format!("bad fold {:?}", &rec[0])))?;
            let entry = folds.get_mut(k).ok_or_else(|| parse_err(format!("fold {k} out of range")))?;
            match &rec[1] {
                "train" => entry.0.push(rec[2].to_string()),
                "test" => entry.1.push(rec[2].to_string()),
                other => return Err(parse_err(format!("unknown role {other:?}"))),
            }
        }
        for (f, (train, test)) in split.folds.iter_mut().zip(folds) {
            f.train_ids = train;
            f.test_ids = test;
        }

        let mask_path = Self::mask_path(path);
        if mask_path.exists() {
            let col: BTreeMap<&str, usize> = split.model_ids.iter().enumerate().map(|(j, m)| (m.as_str(), j)).collect();
            let m = split.model_ids.len();
            let mut masks: Vec<BTreeMap<String, Vec<bool>>> = vec![BTreeMap::new(); split.folds.len()];
            for (k, f) in split.folds.iter().enumerate() {
                if f.params.contains_key("p") {
                    for id in &f.train_ids {
                        masks[k].insert(id.clone(), vec![false; m]);
                    }
                }
            }
            let mut r = csv::Reader::from_path(&mask_path).map_err(|e| Error::csv(&mask_path, e))?;
            for (line, rec) in r.records().enumerate() {
                let rec = rec.map_err(|e| Error::csv(&mask_path, e))?;
                let parse_err = |message: String| Error::Parse {
                    path: mask_path.clone(),
                    line: line + 2,
                    message,
                };
                let k: usize = rec.get(0).and_then(|s| s.parse().ok()).ok_or_else(|| parse_err("bad fold".into()))?;
                let g = rec.get(1).ok_or_else(|| parse_err("missing graph_id".into()))?;
                let model = rec.get(2).ok_or_else(|| parse_err("missing model_id".into()))?;
                let j = *col.get(model).ok_or_else(|| parse_err(format!("unknown model {model:?}")))?;
                let bits = masks
                    .get_mut(k)
                    .and_then(|mk| mk.get_mut(g))
                    .ok_or_else(|| parse_err(format!("graph {g:?} is not a training graph of fold {k}")))?;
                bits[j] = true;
            }
            for (f, mk) in split.folds.iter_mut().zip(masks) {
                if f.params.contains_key("p") {
                    f.train_mask = Some(mk);
                }
            }
        }
        Ok(split)
    }
}
