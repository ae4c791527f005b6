//! Shared fixtures for the criterion benches.

use instasel::selectors::TrainCorpus;
use instasel::synth::{self, PlantedParams};
use instasel::Graph;

/// Erdős–Rényi graphs with average degree about `avg_degree`.
pub fn sparse_graph(n: usize, avg_degree: f64, seed: u64) -> Graph {
    let p = (avg_degree / (n.max(2) - 1) as f64).min(1.0);
    synth::erdos_renyi(n, p, seed)
}

/// The planted five-cluster corpus as a training corpus.
pub fn planted_train_corpus(n_graphs: usize, n_models: usize, seed: u64) -> TrainCorpus {
    let params = PlantedParams {
        n_graphs,
        n_models,
        ..PlantedParams::default()
    };
    let planted = synth::planted_corpus(&params, seed);
    TrainCorpus::from_feature_matrix(&planted.features, planted.perf).expect("planted corpus is consistent")
}
