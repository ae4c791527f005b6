//! Performance matrices (graphs × models) and model catalogs.

use std::collections::{BTreeMap, HashSet};
use std::fmt;
use std::path::Path;
use std::str::FromStr;

use rand::seq::index;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Task {
    LinkPrediction,
    NodeClassification,
}

impl fmt::Display for Task {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Task::LinkPrediction => "link_prediction",
            Task::NodeClassification => "node_classification",
        })
    }
}

impl FromStr for Task {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "link_prediction" | "lp" => Ok(Task::LinkPrediction),
            "node_classification" | "nc" => Ok(Task::NodeClassification),
            _ => Err(Error::invalid(format!("unknown task {s:?}"))),
        }
    }
}

/// Observed model performances. Unobserved cells hold NaN and a `false` mask bit.
#[derive(Clone, Debug)]
pub struct PerformanceMatrix {
    pub graph_ids: Vec<String>,
    pub model_ids: Vec<String>,
    values: Vec<f64>,
    mask: Vec<bool>,
    pub metric: String,
    pub task: Option<Task>,
}

impl PartialEq for PerformanceMatrix {
    fn eq(&self, other: &Self) -> bool {
        self.graph_ids == other.graph_ids
            && self.model_ids == other.model_ids
            && self.mask == other.mask
            && self.metric == other.metric
            && self.task == other.task
            && self
                .values
                .iter()
                .zip(&other.values)
                .zip(&self.mask)
                .all(|((a, b), &m)| !m || a.to_bits() == b.to_bits())
    }
}

impl PerformanceMatrix {
    /// Fully observed matrix from rows.
    pub fn from_rows(graph_ids: Vec<String>, model_ids: Vec<String>, rows: &[Vec<f64>]) -> Result<Self> {
        let cells = rows
            .iter()
            .map(|r| r.iter().map(|&v| Some(v)).collect())
            .collect::<Vec<Vec<_>>>();
        Self::from_cells(graph_ids, model_ids, &cells)
    }

    /// Matrix from optional cells (`None` = unobserved).
    pub fn from_cells(graph_ids: Vec<String>, model_ids: Vec<String>, rows: &[Vec<Option<f64>>]) -> Result<Self> {
        check_unique(&graph_ids, "graph_id")?;
        check_unique(&model_ids, "model_id")?;
        if rows.len() != graph_ids.len() {
            return Err(Error::invalid(format!("{} rows for {} graphs", rows.len(), graph_ids.len())));
        }
        let m = model_ids.len();
        let mut values = Vec::with_capacity(rows.len() * m);
        let mut mask = Vec::with_capacity(rows.len() * m);
        for (i, row) in rows.iter().enumerate() {
            if row.len() != m {
                return Err(Error::invalid(format!("row {} has {} cells, expected {m}", graph_ids[i], row.len())));
            }
            for cell in row {
                match cell {
                    Some(v) if v.is_finite() => {
                        values.push(*v);
                        mask.push(true);
                    }
                    Some(v) => {
                        return Err(Error::invalid(format!("non-finite performance {v} in row {}", graph_ids[i])))
                    }
                    None => {
                        values.push(f64::NAN);
                        mask.push(false);
                    }
                }
            }
        }
        Ok(PerformanceMatrix {
            graph_ids,
            model_ids,
            values,
            mask,
            metric: "perf".into(),
            task: None,
        })
    }

    pub fn with_metric(mut self, metric: impl Into<String>, task: Option<Task>) -> Self {
        self.metric = metric.into();
        self.task = task;
        self
    }

    #[inline]
    pub fn n_graphs(&self) -> usize {
        self.graph_ids.len()
    }

    #[inline]
    pub fn n_models(&self) -> usize {
        self.model_ids.len()
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> Option<f64> {
        let k = i * self.n_models() + j;
        self.mask[k].then_some(self.values[k])
    }

    #[inline]
    pub fn observed(&self, i: usize, j: usize) -> bool {
        self.mask[i * self.n_models() + j]
    }

    /// Raw row values (NaN where unobserved).
    pub fn row_values(&self, i: usize) -> &[f64] {
        let m = self.n_models();
        &self.values[i * m..(i + 1) * m]
    }

    pub fn row_mask(&self, i: usize) -> &[bool] {
        let m = self.n_models();
        &self.mask[i * m..(i + 1) * m]
    }

    /// The row's values if every entry is observed.
    pub fn full_row(&self, i: usize) -> Option<&[f64]> {
        self.row_mask(i).iter().all(|&b| b).then(|| self.row_values(i))
    }

    pub fn n_observed(&self) -> usize {
        self.mask.iter().filter(|&&b| b).count()
    }

    pub fn is_fully_observed(&self) -> bool {
        self.mask.iter().all(|&b| b)
    }

    pub fn graph_index(&self, graph_id: &str) -> Option<usize> {
        self.graph_ids.iter().position(|g| g == graph_id)
    }

    pub fn model_index(&self, model_id: &str) -> Option<usize> {
        self.model_ids.iter().position(|g| g == model_id)
    }

    /// Submatrix with the given rows and columns, in the given order.
    pub fn select(&self, rows: &[usize], cols: &[usize]) -> PerformanceMatrix {
        let mut values = Vec::with_capacity(rows.len() * cols.len());
        let mut mask = Vec::with_capacity(rows.len() * cols.len());
        for &i in rows {
            for &j in cols {
                let k = i * self.n_models() + j;
                values.push(self.values[k]);
                mask.push(self.mask[k]);
            }
        }
        PerformanceMatrix {
            graph_ids: rows.iter().map(|&i| self.graph_ids[i].clone()).collect(),
            model_ids: cols.iter().map(|&j| self.model_ids[j].clone()).collect(),
            values,
            mask,
            metric: self.metric.clone(),
            task: self.task,
        }
    }

    pub fn select_rows(&self, rows: &[usize]) -> PerformanceMatrix {
        let cols: Vec<usize> = (0..self.n_models()).collect();
        self.select(rows, &cols)
    }

    /// Same values, observation mask replaced. Newly unmasked cells must have values.
    pub fn with_mask(&self, mask: Vec<bool>) -> Result<PerformanceMatrix> {
        if mask.len() != self.mask.len() {
            return Err(Error::invalid("mask shape mismatch"));
        }
        if mask.iter().zip(&self.mask).any(|(&new, &old)| new && !old) {
            return Err(Error::invalid("mask observes a cell that has no value"));
        }
        Ok(PerformanceMatrix {
            mask,
            ..self.clone()
        })
    }

    pub fn mask(&self) -> &[bool] {
        &self.mask
    }

    /// Reads `graph_id,<model_id>...`; empty cells are unobserved.
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let mut r = csv::ReaderBuilder::new()
            .trim(csv::Trim::All)
            .from_path(path)
            .map_err(|e| Error::csv(path, e))?;
        let header = r.headers().map_err(|e| Error::csv(path, e))?.clone();
        if header.get(0) != Some("graph_id") {
            return Err(Error::Parse {
                path: path.to_path_buf(),
                line: 1,
                message: "first column must be graph_id".into(),
            });
        }
        let model_ids: Vec<String> = header.iter().skip(1).map(str::to_owned).collect();
        let mut graph_ids = Vec::new();
        let mut rows = Vec::new();
        for (i, rec) in r.records().enumerate() {
            let rec = rec.map_err(|e| Error::csv(path, e))?;
            graph_ids.push(rec[0].to_string());
            let mut row = Vec::with_capacity(model_ids.len());
            for (j, cell) in rec.iter().skip(1).enumerate() {
                if cell.is_empty() {
                    row.push(None);
                } else {
                    let v: f64 = cell.parse().map_err(|_| Error::Parse {
                        path: path.to_path_buf(),
                        line: i + 2,
                        message: format!("model {}: invalid number {cell:?}", model_ids[j]),
                    })?;
                    row.push(Some(v));
                }
            }
            rows.push(row);
        }
        Self::from_cells(graph_ids, model_ids, &rows)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let mut w = csv::Writer::from_path(path).map_err(|e| Error::csv(path, e))?;
        let mut header = vec!["graph_id".to_string()];
        header.extend(self.model_ids.iter().cloned());
        w.write_record(&header).map_err(|e| Error::csv(path, e))?;
        for i in 0..self.n_graphs() {
            let mut rec = vec![self.graph_ids[i].clone()];
            rec.extend((0..self.n_models()).map(|j| self.get(i, j).map(|v| v.to_string()).unwrap_or_default()));
            w.write_record(&rec).map_err(|e| Error::csv(path, e))?;
        }
        w.flush().map_err(|e| Error::io(path, e))
    }
}

fn check_unique(ids: &[String], what: &str) -> Result<()> {
    let mut seen = HashSet::new();
    for id in ids {
        if !seen.insert(id) {
            return Err(Error::invalid(format!("duplicate {what} {id:?}")));
        }
    }
    Ok(())
}

/// Observations kept per row when sparsifying to fraction `p` of `m` models:
/// `round_half_up(p·m)`, at least 1.
pub fn sparse_row_count(p: f64, m: usize) -> usize {
    ((p * m as f64 + 0.5).floor() as usize).clamp(1, m.max(1))
}

/// Keeps `sparse_row_count(p, m)` uniformly chosen observed entries per row.
/// Only rows in `rows` are thinned; the other rows keep their mask.
pub fn sparsify_rows_subset(perf: &PerformanceMatrix, rows: &[usize], p: f64, seed: u64) -> Result<PerformanceMatrix> {
    if !(p > 0.0 && p <= 1.0) {
        return Err(Error::invalid(format!("sparsity p must be in (0, 1], got {p}")));
    }
    let m = perf.n_models();
    let keep = sparse_row_count(p, m);
    let mut mask = perf.mask.clone();
    for &i in rows {
        let observed: Vec<usize> = (0..m).filter(|&j| perf.observed(i, j)).collect();
        if observed.len() <= keep {
            continue;
        }
        let mut r = rng::seeded(rng::derive(seed, i as u64));
        let row_mask = &mut mask[i * m..(i + 1) * m];
        row_mask.iter_mut().for_each(|b| *b = false);
        for k in index::sample(&mut r, observed.len(), keep) {
            row_mask[observed[k]] = true;
        }
    }
    perf.with_mask(mask)
}

pub fn sparsify_rows(perf: &PerformanceMatrix, p: f64, seed: u64) -> Result<PerformanceMatrix> {
    let rows: Vec<usize> = (0..perf.n_graphs()).collect();
    sparsify_rows_subset(perf, &rows, p, seed)
}

/// One candidate model: a method with a hyperparameter setting.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ModelConfig {
    pub model_id: String,
    pub method: String,
    pub hyperparameters: BTreeMap<String, serde_json::Value>,
}

impl ModelConfig {
    /// Canonical JSON (sorted keys) of the hyperparameters.
    pub fn canonical_hyperparameters(&self) -> String {
        serde_json::to_string(&self.hyperparameters).expect("json map serializes")
    }

    /// Matching key across catalogs: method plus canonical hyperparameters.
    pub fn match_key(&self) -> String {
        format!("{}|{}", self.method, self.canonical_hyperparameters())
    }
}

#[derive(Debug, Deserialize, Serialize)]
struct CatalogRow {
    model_id: String,
    method: String,
    hyperparams_json: String,
}

/// Reads a model catalog `model_id,method,hyperparams_json`.
pub fn load_model_catalog(path: impl AsRef<Path>) -> Result<Vec<ModelConfig>> {
    let path = path.as_ref();
    let mut r = csv::Reader::from_path(path).map_err(|e| Error::csv(path, e))?;
    let mut out = Vec::new();
    let mut ids = HashSet::new();
    let mut keys = HashSet::new();
    for (i, row) in r.deserialize::<CatalogRow>().enumerate() {
        let row = row.map_err(|e| Error::csv(path, e))?;
        let hyperparameters: BTreeMap<String, serde_json::Value> =
            serde_json::from_str(&row.hyperparams_json).map_err(|e| Error::Parse {
                path: path.to_path_buf(),
                line: i + 2,
                message: format!("hyperparams_json: {e}"),
            })?;
        let cfg = ModelConfig {
            model_id: row.model_id,
            method: row.method,
            hyperparameters,
        };
        if !ids.insert(cfg.model_id.clone()) {
            return Err(Error::invalid(format!("duplicate model_id {}", cfg.model_id)));
        }
        if !keys.insert(cfg.match_key()) {
            return Err(Error::invalid(format!("duplicate configuration for model {}", cfg.model_id)));
        }
        out.push(cfg);
    }
    Ok(out)
}

pub fn save_model_catalog(models: &[ModelConfig], path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let mut w = csv::Writer::from_path(path).map_err(|e| Error::csv(path, e))?;
    for m in models {
        w.serialize(CatalogRow {
            model_id: m.model_id.clone(),
            method: m.method.clone(),
            hyperparams_json: m.canonical_hyperparameters(),
        })
        .map_err(|e| Error::csv(path, e))?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::fs;

    fn ids(prefix: &str, n: usize) -> Vec<String> {
        (0..n).map(|i| format!("{prefix}{i}")).collect()
    }

    fn full(n: usize, m: usize) -> PerformanceMatrix {
        let rows: Vec<Vec<f64>> = (0..n).map(|i| (0..m).map(|j| (i * m + j) as f64 / 100.0).collect()).collect();
        PerformanceMatrix::from_rows(ids("g", n), ids("m", m), &rows).unwrap()
    }

    #[test]
    fn load_full_and_partial() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("p.csv");
        fs::write(&p, "graph_id,a,b\ng1,0.5,0.25\ng2,,1\n").unwrap();
        let pm = PerformanceMatrix::load(&p).unwrap();
        assert_eq!(pm.get(0, 0), Some(0.5));
        assert_eq!(pm.get(1, 0), None);
        assert_eq!(pm.get(1, 1), Some(1.0));
        assert!(!pm.is_fully_observed());
    }

    #[test]
    fn load_errors() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("p.csv");
        fs::write(&p, "graph_id,a,a\ng1,0.5,0.25\n").unwrap();
        assert!(PerformanceMatrix::load(&p).is_err());
        fs::write(&p, "graph_id,a\ng1,0.5\ng1,0.2\n").unwrap();
        assert!(PerformanceMatrix::load(&p).is_err());
        fs::write(&p, "graph_id,a,b\ng1,0.5,oops\n").unwrap();
        match PerformanceMatrix::load(&p) {
            Err(Error::Parse { line, message, .. }) => {
                assert_eq!(line, 2);
                assert!(message.contains("model b"));
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn save_load_is_bit_exact() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("p.csv");
        let rows = vec![vec![Some(0.1 + 0.2), None], vec![Some(1e-300), Some(std::f64::consts::PI)]];
        let pm = PerformanceMatrix::from_cells(ids("g", 2), ids("m", 2), &rows).unwrap();
        pm.save(&p).unwrap();
        assert_eq!(PerformanceMatrix::load(&p).unwrap(), pm);
    }

    #[test]
    fn sparsify_counts() {
        let pm = full(4, 10);
        let sp = sparsify_rows(&pm, 0.3, 1).unwrap();
        for i in 0..4 {
            assert_eq!(sp.row_mask(i).iter().filter(|&&b| b).count(), 3);
            for j in 0..10 {
                if let Some(v) = sp.get(i, j) {
                    assert_eq!(Some(v), pm.get(i, j));
                }
            }
        }
        assert_eq!(sparsify_rows(&pm, 1.0, 1).unwrap(), pm);
        assert_eq!(sp, sparsify_rows(&pm, 0.3, 1).unwrap());
    }

    #[test]
    fn sparsify_350_models() {
        let pm = full(3, 350);
        let sp = sparsify_rows(&pm, 0.1, 5).unwrap();
        for i in 0..3 {
            assert_eq!(sp.row_mask(i).iter().filter(|&&b| b).count(), 35);
        }
    }

    #[test]
    fn sparse_count_rounding() {
        assert_eq!(sparse_row_count(0.5, 5), 3);
        assert_eq!(sparse_row_count(0.01, 10), 1);
        assert_eq!(sparse_row_count(0.5, 350), 175);
        assert_eq!(sparse_row_count(0.7, 10), 7);
    }

    #[test]
    fn model_catalog_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("models.csv");
        fs::write(
            &p,
            "model_id,method,hyperparams_json\nm0,GCN,\"{\"\"lr\"\":0.01,\"\"hidden\"\":16}\"\nm1,GAT,\"{}\"\n",
        )
        .unwrap();
        let models = load_model_catalog(&p).unwrap();
        assert_eq!(models[0].canonical_hyperparameters(), r#"{"hidden":16,"lr":0.01}"#);
        let q = dir.path().join("models2.csv");
        save_model_catalog(&models, &q).unwrap();
        assert_eq!(load_model_catalog(&q).unwrap(), models);
    }

    #[test]
    fn model_catalog_rejects_duplicate_configs() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("models.csv");
        fs::write(
            &p,
            "model_id,method,hyperparams_json\nm0,GCN,\"{\"\"a\"\":1,\"\"b\"\":2}\"\nm1,GCN,\"{\"\"b\"\":2,\"\"a\"\":1}\"\n",
        )
        .unwrap();
        assert!(load_model_catalog(&p).is_err());
    }
}
