//! Top-1 selection metrics and their aggregation into reports.
//!
//! With a single relevant model per query, mean average precision equals
//! the reciprocal rank, so MAP and MRR are computed by the same function.

use std::fmt::{self, Write as _};
use std::io::Write;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Index of the best performance, lowest index on ties.
pub fn best_index(perfs: &[f64]) -> usize {
    let mut best = 0;
    for (j, &p) in perfs.iter().enumerate() {
        if p > perfs[best] {
            best = j;
        }
    }
    best
}

/// Rank-based AUC of `scores` against the one-hot label of `best`; ties count 0.5.
pub fn top1_auc(scores: &[f64], best: usize) -> f64 {
    let m = scores.len();
    if m < 2 {
        return 1.0;
    }
    let s = scores[best];
    let mut wins = 0.0;
    for (j, &x) in scores.iter().enumerate() {
        if j == best {
            continue;
        }
        if x < s {
            wins += 1.0;
        } else if x == s {
            wins += 0.5;
        }
    }
    wins / (m - 1) as f64
}

/// Reciprocal of the best model's rank, tied scores sharing their average rank.
pub fn mrr(scores: &[f64], best: usize) -> f64 {
    let s = scores[best];
    let mut greater = 0usize;
    let mut ties = 0usize;
    for (j, &x) in scores.iter().enumerate() {
        if j != best {
            if x > s {
                greater += 1;
            } else if x == s {
                ties += 1;
            }
        }
    }
    1.0 / (1.0 + greater as f64 + ties as f64 / 2.0)
}

pub fn map(scores: &[f64], best: usize) -> f64 {
    mrr(scores, best)
}

/// Relevance of the predicted top model over the best relevance, with
/// relevance = performance − min performance; 1 when all performances are equal.
pub fn ndcg_at_1(scores: &[f64], perfs: &[f64]) -> f64 {
    let top = crate::selectors::ranking(scores)[0];
    let min = perfs.iter().copied().fold(f64::INFINITY, f64::min);
    let max_rel = perfs.iter().map(|p| p - min).fold(0.0, f64::max);
    if max_rel == 0.0 {
        1.0
    } else {
        (perfs[top] - min) / max_rel
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MetricKind {
    Auc,
    Mrr,
    Map,
    Ndcg1,
}

impl MetricKind {
    /// Metrics written to report files; MAP is omitted since it equals MRR.
    pub const REPORTED: [MetricKind; 3] = [MetricKind::Auc, MetricKind::Mrr, MetricKind::Ndcg1];

    pub fn as_str(self) -> &'static str {
        match self {
            MetricKind::Auc => "auc",
            MetricKind::Mrr => "mrr",
            MetricKind::Map => "map",
            MetricKind::Ndcg1 => "ndcg1",
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            MetricKind::Auc => "AUC",
            MetricKind::Mrr | MetricKind::Map => "MRR / MAP",
            MetricKind::Ndcg1 => "NDCG@1",
        }
    }
}

impl fmt::Display for MetricKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for MetricKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "auc" => Ok(MetricKind::Auc),
            "mrr" => Ok(MetricKind::Mrr),
            "map" => Ok(MetricKind::Map),
            "ndcg1" | "ndcg@1" => Ok(MetricKind::Ndcg1),
            _ => Err(Error::invalid(format!("unknown metric {s:?}"))),
        }
    }
}

/// Metrics of one test graph.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GraphResult {
    pub fold: usize,
    pub graph_id: String,
    pub auc: f64,
    pub mrr: f64,
    pub ndcg1: f64,
}

impl GraphResult {
    pub fn compute(fold: usize, graph_id: impl Into<String>, scores: &[f64], perfs: &[f64]) -> Result<Self> {
        let graph_id = graph_id.into();
        if scores.len() != perfs.len() || scores.is_empty() {
            return Err(Error::invalid(format!(
                "graph {graph_id}: {} scores for {} performances",
                scores.len(),
                perfs.len()
            )));
        }
        let best = best_index(perfs);
        Ok(GraphResult {
            fold,
            auc: top1_auc(scores, best),
            mrr: mrr(scores, best),
            ndcg1: ndcg_at_1(scores, perfs),
            graph_id,
        })
    }

    pub fn get(&self, metric: MetricKind) -> f64 {
        match metric {
            MetricKind::Auc => self.auc,
            MetricKind::Mrr | MetricKind::Map => self.mrr,
            MetricKind::Ndcg1 => self.ndcg1,
        }
    }
}

/// Per-graph results of one algorithm on one testbed.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EvaluationReport {
    pub testbed: String,
    pub algorithm: String,
    pub results: Vec<GraphResult>,
}

fn mean(xs: &[f64]) -> f64 {
    if xs.is_empty() {
        f64::NAN
    } else {
        xs.iter().sum::<f64>() / xs.len() as f64
    }
}

impl EvaluationReport {
    pub fn new(testbed: impl Into<String>, algorithm: impl Into<String>, results: Vec<GraphResult>) -> Self {
        EvaluationReport {
            testbed: testbed.into(),
            algorithm: algorithm.into(),
            results,
        }
    }

    pub fn count(&self) -> usize {
        self.results.len()
    }

    pub fn folds(&self) -> Vec<usize> {
        let mut f: Vec<usize> = self.results.iter().map(|r| r.fold).collect();
        f.sort_unstable();
        f.dedup();
        f
    }

    fn values(&self, metric: MetricKind, fold: Option<usize>) -> Vec<f64> {
        self.results
            .iter()
            .filter(|r| fold.is_none_or(|f| r.fold == f))
            .map(|r| r.get(metric))
            .collect()
    }

    /// Mean over all test graphs.
    pub fn mean(&self, metric: MetricKind) -> f64 {
        mean(&self.values(metric, None))
    }

    pub fn fold_mean(&self, metric: MetricKind, fold: usize) -> f64 {
        mean(&self.values(metric, Some(fold)))
    }

    /// Sample standard deviation over test graphs divided by √(#test graphs).
    pub fn stderr(&self, metric: MetricKind) -> f64 {
        let xs = self.values(metric, None);
        let n = xs.len();
        if n < 2 {
            return 0.0;
        }
        let mu = mean(&xs);
        let var = xs.iter().map(|x| (x - mu).powi(2)).sum::<f64>() / (n - 1) as f64;
        (var / n as f64).sqrt()
    }
}

/// CSV `testbed,algorithm,metric,fold,value`: one row per fold mean, then
/// `mean` and `stderr` rows over all test graphs.
pub fn write_reports_csv(reports: &[EvaluationReport], out: impl Write) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let err = |e| Error::csv("<report>", e);
    w.write_record(["testbed", "algorithm", "metric", "fold", "value"]).map_err(err)?;
    for r in reports {
        for metric in MetricKind::REPORTED {
            for fold in r.folds() {
                w.write_record([
                    r.testbed.as_str(),
                    r.algorithm.as_str(),
                    metric.as_str(),
                    &fold.to_string(),
                    &format_value(r.fold_mean(metric, fold)),
                ])
                .map_err(err)?;
            }
            for (label, v) in [("mean", r.mean(metric)), ("stderr", r.stderr(metric))] {
                w.write_record([r.testbed.as_str(), r.algorithm.as_str(), metric.as_str(), label, &format_value(v)])
                    .map_err(err)?;
            }
        }
    }
    w.flush().map_err(|e| Error::io("<report>", e))
}

fn format_value(v: f64) -> String {
    format!("{v:.6}")
}

/// Metrics as rows and algorithms as columns, cells `mean (stderr)`.
pub fn markdown_table(reports: &[EvaluationReport]) -> String {
    let mut s = String::new();
    let _ = write!(s, "| Metric |");
    for r in reports {
        let _ = write!(s, " {} |", r.algorithm);
    }
    s.push('\n');
    s.push_str("|---|");
    for _ in reports {
        s.push_str("---|");
    }
    s.push('\n');
    for metric in MetricKind::REPORTED {
        let _ = write!(s, "| {} |", metric.label());
        for r in reports {
            let _ = write!(s, " {:.3} ({:.3}) |", r.mean(metric), r.stderr(metric));
        }
        s.push('\n');
    }
    s
}

/// The `mean` and `stderr` rows of one (testbed, algorithm, metric) in a report CSV.
#[derive(Clone, Debug, PartialEq)]
pub struct ReportSummary {
    pub testbed: String,
    pub algorithm: String,
    pub metric: MetricKind,
    pub mean: f64,
    pub stderr: f64,
}

/// Reads the aggregate rows back from a file written by [`write_reports_csv`].
pub fn read_report_summaries(path: impl AsRef<std::path::Path>) -> Result<Vec<ReportSummary>> {
    let path = path.as_ref();
    let mut reader = csv::Reader::from_path(path).map_err(|e| Error::csv(path, e))?;
    let mut out: Vec<ReportSummary> = Vec::new();
    for (line, record) in reader.records().enumerate() {
        let record = record.map_err(|e| Error::csv(path, e))?;
        let parse_err = |message: String| Error::Parse {
            path: path.to_path_buf(),
            line: line + 2,
            message,
        };
        if record.len() != 5 {
            return Err(parse_err(format!("expected 5 fields, found {}", record.len())));
        }
        let (testbed, algorithm, fold) = (&record[0], &record[1], &record[3]);
        if fold != "mean" && fold != "stderr" {
            continue;
        }
        let metric: MetricKind = record[2].parse().map_err(|e: Error| parse_err(e.to_string()))?;
        let value: f64 = record[4].parse().map_err(|_| parse_err(format!("bad value {:?}", &record[4])))?;
        let pos = out
            .iter()
            .position(|r| r.testbed == testbed && r.algorithm == algorithm && r.metric == metric);
        let entry = match pos {
            Some(i) => &mut out[i],
            None => {
                out.push(ReportSummary {
                    testbed: testbed.to_string(),
                    algorithm: algorithm.to_string(),
                    metric,
                    mean: f64::NAN,
                    stderr: f64::NAN,
                });
                out.last_mut().expect("just pushed")
            }
        };
        if fold == "mean" {
            entry.mean = value;
        } else {
            entry.stderr = value;
        }
    }
    Ok(out)
}

/// One table per testbed, same layout as [`markdown_table`].
pub fn summaries_markdown(rows: &[ReportSummary]) -> String {
    let mut testbeds: Vec<&str> = Vec::new();
    for r in rows {
        if !testbeds.contains(&r.testbed.as_str()) {
            testbeds.push(&r.testbed);
        }
    }
    let mut s = String::new();
    for tb in testbeds {
        let here: Vec<&ReportSummary> = rows.iter().filter(|r| r.testbed == tb).collect();
        let mut algorithms: Vec<&str> = Vec::new();
        let mut metrics: Vec<MetricKind> = Vec::new();
        for r in &here {
            if !algorithms.contains(&r.algorithm.as_str()) {
                algorithms.push(&r.algorithm);
            }
            if !metrics.contains(&r.metric) {
                metrics.push(r.metric);
            }
        }
        let _ = writeln!(s, "### {tb}\n");
        let _ = write!(s, "| Metric |");
        for a in &algorithms {
            let _ = write!(s, " {a} |");
        }
        s.push_str("\n|---|");
        s.push_str(&"---|".repeat(algorithms.len()));
        s.push('\n');
        for m in metrics {
            let _ = write!(s, "| {} |", m.label());
            for a in &algorithms {
                match here.iter().find(|r| r.algorithm == *a && r.metric == m) {
                    Some(r) => {
                        let _ = write!(s, " {:.3} ({:.3}) |", r.mean, r.stderr);
                    }
                    None => s.push_str(" - |"),
                }
            }
            s.push('\n');
        }
        s.push('\n');
    }
    s
}
