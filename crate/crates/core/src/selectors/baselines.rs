//! Query-independent baselines, random scores, ISAC and ArgoSmart.

use rand::Rng as _;
use serde::{Deserialize, Serialize};

use super::kmeans::{kmeans, nearest};
use super::scaler::Scaler;
use super::{TrainCorpus, UNOBSERVED_SCORE};
use crate::error::Result;
use crate::linalg::{cosine, Matrix};
use crate::perf::PerformanceMatrix;
use crate::rng;

/// I.i.d. uniform(0, 1) scores, deterministic in `(seed, query)`.
pub fn random_scores(m: usize, seed: u64, query: &[f64]) -> Vec<f64> {
    let mut r = rng::seeded(rng::derive(seed, rng::hash_f64s(query)));
    (0..m).map(|_| r.gen::<f64>()).collect()
}

/// Mean of the observed entries of each column over `rows`, summed in row order.
pub(crate) fn masked_column_means(perf: &PerformanceMatrix, rows: &[usize]) -> Vec<Option<f64>> {
    (0..perf.n_models())
        .map(|j| {
            let mut sum = 0.0;
            let mut count = 0usize;
            for &i in rows {
                if let Some(v) = perf.get(i, j) {
                    sum += v;
                    count += 1;
                }
            }
            (count > 0).then(|| sum / count as f64)
        })
        .collect()
}

pub fn gb_avgperf(perf: &PerformanceMatrix) -> Vec<f64> {
    let rows: Vec<usize> = (0..perf.n_graphs()).collect();
    masked_column_means(perf, &rows)
        .into_iter()
        .map(|v| v.unwrap_or(UNOBSERVED_SCORE))
        .collect()
}

/// Ascending ranks (1-based) with ties receiving their average rank.
pub(crate) fn average_ranks(values: &[f64]) -> Vec<f64> {
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
    let mut ranks = vec![0.0; values.len()];
    let mut start = 0;
    while start < order.len() {
        let mut end = start + 1;
        while end < order.len() && values[order[end]] == values[order[start]] {
            end += 1;
        }
        // ranks start+1 ..= end
        let avg = (start + 1 + end) as f64 / 2.0;
        for &k in &order[start..end] {
            ranks[k] = avg;
        }
        start = end;
    }
    ranks
}

/// Mean within-row rank percentile; the best model of a row gets 1.
pub fn gb_avgrank(perf: &PerformanceMatrix) -> Vec<f64> {
    let m = perf.n_models();
    let mut sums = vec![0.0; m];
    let mut counts = vec![0usize; m];
    for i in 0..perf.n_graphs() {
        let cols: Vec<usize> = (0..m).filter(|&j| perf.observed(i, j)).collect();
        let values: Vec<f64> = cols.iter().map(|&j| perf.row_values(i)[j]).collect();
        let k = cols.len() as f64;
        for (&j, r) in cols.iter().zip(average_ranks(&values)) {
            sums[j] += r / k;
            counts[j] += 1;
        }
    }
    sums.iter()
        .zip(&counts)
        .map(|(&s, &c)| if c > 0 { s / c as f64 } else { UNOBSERVED_SCORE })
        .collect()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IsacState {
    pub scaler: Scaler,
    pub centroids: Matrix,
    /// Per-cluster model scores, one row per centroid.
    pub cluster_scores: Matrix,
}

impl IsacState {
    /// `k` is clamped to the number of training graphs.
    pub fn fit(corpus: &TrainCorpus, k: usize, seed: u64, max_iter: usize) -> Result<Self> {
        let k = k.clamp(1, corpus.n());
        let scaler = Scaler::fit(&corpus.features);
        let z = scaler.transform_matrix(&corpus.features);
        let km = kmeans(&z, k, seed, max_iter)?;
        let all: Vec<usize> = (0..corpus.n()).collect();
        let global = masked_column_means(&corpus.perf, &all);
        let mut cluster_scores = Matrix::zeros(k, corpus.m());
        for c in 0..k {
            let members: Vec<usize> = all.iter().copied().filter(|&i| km.assignments[i] == c).collect();
            let local = masked_column_means(&corpus.perf, &members);
            for (j, (l, g)) in local.iter().zip(&global).enumerate() {
                cluster_scores.set(c, j, l.or(*g).unwrap_or(UNOBSERVED_SCORE));
            }
        }
        Ok(IsacState {
            scaler,
            centroids: km.centroids,
            cluster_scores,
        })
    }

    pub fn predict(&self, query: &[f64]) -> Vec<f64> {
        let (c, _) = nearest(&self.centroids, &self.scaler.transform(query));
        self.cluster_scores.row(c).to_vec()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ArgoSmartState {
    pub features: Matrix,
    /// Training rows with unobserved entries filled by the row's observed mean.
    pub rows: Matrix,
}

impl ArgoSmartState {
    pub fn fit(corpus: &TrainCorpus) -> Self {
        let (n, m) = (corpus.n(), corpus.m());
        let mut rows = Matrix::zeros(n, m);
        for i in 0..n {
            let observed: Vec<f64> = (0..m).filter_map(|j| corpus.perf.get(i, j)).collect();
            let fill = if observed.is_empty() {
                UNOBSERVED_SCORE
            } else {
                observed.iter().sum::<f64>() / observed.len() as f64
            };
            for j in 0..m {
                rows.set(i, j, corpus.perf.get(i, j).unwrap_or(fill));
            }
        }
        ArgoSmartState {
            features: corpus.features.clone(),
            rows,
        }
    }

    /// Training graph with the highest cosine similarity. Cosines within
    /// `COSINE_TIE` count as tied (collinear features) and go to the smaller
    /// Euclidean distance, then the lower index, so a training graph queried
    /// with its own features finds itself.
    pub fn nearest(&self, query: &[f64]) -> usize {
        const COSINE_TIE: f64 = 1e-12;
        let dist = |row: &[f64]| row.iter().zip(query).map(|(a, b)| (a - b).powi(2)).sum::<f64>();
        let mut best = (0, f64::NEG_INFINITY, f64::INFINITY);
        for (i, row) in self.features.iter_rows().enumerate() {
            let s = cosine(row, query);
            if s > best.1 + COSINE_TIE {
                best = (i, s, dist(row));
            } else if s >= best.1 - COSINE_TIE {
                let d = dist(row);
                if d < best.2 {
                    best = (i, s.max(best.1), d);
                }
            }
        }
        best.0
    }

    pub fn predict(&self, query: &[f64]) -> Vec<f64> {
        self.rows.row(self.nearest(query)).to_vec()
    }
}
