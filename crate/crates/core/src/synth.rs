//! Synthetic graphs and corpora with known structure.

use rand::Rng as _;
use rand_distr::{Distribution, Normal};

use crate::error::Result;
use crate::features::FeatureMatrix;
use crate::graph::{CatalogEntry, Graph};
use crate::linalg::Matrix;
use crate::metafeat::Schema;
use crate::perf::PerformanceMatrix;
use crate::rng;

/// G(n, p) with every pair included independently.
pub fn erdos_renyi(n: usize, p: f64, seed: u64) -> Graph {
    let mut r = rng::seeded(seed);
    let mut edges = Vec::new();
    for u in 0..n {
        for v in u + 1..n {
            if r.gen_bool(p) {
                edges.push((u, v));
            }
        }
    }
    Graph::new(n, edges, false).expect("generated edges are in range")
}

/// Relabels nodes by a uniformly random permutation.
pub fn permute_nodes(g: &Graph, seed: u64) -> Graph {
    use rand::seq::SliceRandom;
    let mut perm: Vec<usize> = (0..g.n()).collect();
    perm.shuffle(&mut rng::seeded(seed));
    let edges = g.edges().iter().map(|&(u, v)| (perm[u], perm[v]));
    Graph::new(g.n(), edges, g.directed()).expect("permutation preserves range")
}

#[derive(Clone, Debug)]
pub struct PlantedParams {
    pub n_graphs: usize,
    pub n_clusters: usize,
    pub n_models: usize,
    /// Standard deviation of the cluster centres.
    pub center_scale: f64,
    /// Standard deviation of each graph's offset from its centre.
    pub feature_noise: f64,
    /// Standard deviation of the noise added to every performance.
    pub perf_noise: f64,
}

impl Default for PlantedParams {
    fn default() -> Self {
        PlantedParams {
            n_graphs: 100,
            n_clusters: 5,
            n_models: 20,
            center_scale: 3.0,
            feature_noise: 1.0,
            perf_noise: 0.05,
        }
    }
}

/// Meta-features in `n_clusters` Gaussian blobs. Model `c` scores 0.9 on
/// cluster `c` and 0.1 elsewhere; model `n_clusters` is a generalist at 0.6;
/// the remaining models draw uniformly from (0.2, 0.5). Every entry gets
/// Gaussian noise.
#[derive(Clone, Debug)]
pub struct PlantedCorpus {
    pub catalog: Vec<CatalogEntry>,
    pub features: FeatureMatrix,
    pub perf: PerformanceMatrix,
    pub cluster: Vec<usize>,
}

pub fn planted_corpus(params: &PlantedParams, seed: u64) -> PlantedCorpus {
    assert!(params.n_models > params.n_clusters, "need a generalist model");
    let mut r = rng::seeded(seed);
    let dim = Schema::Compact.dim();
    let centre_dist = Normal::new(0.0, params.center_scale).expect("valid sd");
    let offset = Normal::new(0.0, params.feature_noise).expect("valid sd");
    let noise = Normal::new(0.0, params.perf_noise).expect("valid sd");
    let centres: Vec<Vec<f64>> = (0..params.n_clusters)
        .map(|_| (0..dim).map(|_| centre_dist.sample(&mut r)).collect())
        .collect();

    let mut catalog = Vec::with_capacity(params.n_graphs);
    let mut features = Vec::with_capacity(params.n_graphs);
    let mut rows = Vec::with_capacity(params.n_graphs);
    let mut cluster = Vec::with_capacity(params.n_graphs);
    for i in 0..params.n_graphs {
        let c = i % params.n_clusters;
        let id = format!("g{i:03}");
        features.push(centres[c].iter().map(|x| x + offset.sample(&mut r)).collect::<Vec<f64>>());
        let row: Vec<f64> = (0..params.n_models)
            .map(|j| {
                let base = if j < params.n_clusters {
                    if j == c {
                        0.9
                    } else {
                        0.1
                    }
                } else if j == params.n_clusters {
                    0.6
                } else {
                    r.gen_range(0.2..0.5)
                };
                base + noise.sample(&mut r)
            })
            .collect();
        rows.push(row);
        catalog.push(CatalogEntry {
            graph_id: id.clone(),
            name: id,
            domain: format!("cluster{c}"),
            n_nodes: r.gen_range(50..5000),
            n_edges: 0,
            has_labels: false,
        });
        cluster.push(c);
    }
    let graph_ids: Vec<String> = catalog.iter().map(|e| e.graph_id.clone()).collect();
    let model_ids = (0..params.n_models).map(|j| format!("model{j:02}")).collect();
    let perf = PerformanceMatrix::from_rows(graph_ids.clone(), model_ids, &rows).expect("finite planted values");
    let features = FeatureMatrix {
        schema: Schema::Compact,
        graph_ids,
        values: Matrix::from_rows(&features),
    };
    PlantedCorpus {
        catalog,
        features,
        perf,
        cluster,
    }
}

/// Uniform(0, 1) performances for the given graphs and `m` models.
pub fn random_performance(graph_ids: &[String], m: usize, seed: u64) -> Result<PerformanceMatrix> {
    let mut r = rng::seeded(seed);
    let rows: Vec<Vec<f64>> = graph_ids.iter().map(|_| (0..m).map(|_| r.gen::<f64>()).collect()).collect();
    PerformanceMatrix::from_rows(graph_ids.to_vec(), (0..m).map(|j| format!("model{j:03}")).collect(), &rows)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn planted_shapes_and_determinism() {
        let a = planted_corpus(&PlantedParams::default(), 3);
        assert_eq!(a.features.values.shape(), (100, 58));
        assert_eq!(a.perf.n_models(), 20);
        assert!(a.perf.is_fully_observed());
        let b = planted_corpus(&PlantedParams::default(), 3);
        assert_eq!(a.perf, b.perf);
        assert_eq!(a.features, b.features);
    }

    #[test]
    fn permutation_keeps_edge_count() {
        let g = erdos_renyi(12, 0.4, 1);
        let h = permute_nodes(&g, 2);
        assert_eq!(g.m(), h.m());
        let mut dg = g.degrees();
        let mut dh = h.degrees();
        dg.sort_unstable();
        dh.sort_unstable();
        assert_eq!(dg, dh);
    }
}
