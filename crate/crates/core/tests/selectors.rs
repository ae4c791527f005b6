mod common;

use instasel::eval::{mrr, ndcg_at_1, top1_auc};
use instasel::selectors::alors::AlorsObjective;
use instasel::selectors::baselines::{gb_avgperf, random_scores};
use instasel::selectors::metagl::MetaGlObjective;
use instasel::selectors::ncf::NcfObjective;
use instasel::selectors::s2::S2Objective;
use instasel::selectors::{ranking, UNOBSERVED_SCORE};
use instasel::{Algorithm, Matrix, PerformanceMatrix, SelectorConfig, SelectorModel, TrainCorpus};
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

fn random_corpus(r: &mut StdRng, n: usize, m: usize, d: usize, observed: f64) -> TrainCorpus {
    let features: Vec<Vec<f64>> = (0..n).map(|_| (0..d).map(|_| r.gen_range(-3.0..3.0)).collect()).collect();
    let cells: Vec<Vec<Option<f64>>> = (0..n)
        .map(|_| {
            let mut row: Vec<Option<f64>> = (0..m).map(|_| r.gen_bool(observed).then(|| r.gen::<f64>())).collect();
            if row.iter().all(Option::is_none) {
                row[0] = Some(r.gen());
            }
            row
        })
        .collect();
    let perf = PerformanceMatrix::from_cells(
        (0..n).map(|i| format!("g{i}")).collect(),
        (0..m).map(|j| format!("m{j}")).collect(),
        &cells,
    )
    .unwrap();
    TrainCorpus::new(Matrix::from_rows(&features), perf).unwrap()
}

#[test]
fn isac_with_one_cluster_is_global_best() {
    let mut r = StdRng::seed_from_u64(1);
    for trial in 0..20 {
        let (n, m) = (r.gen_range(2..30), r.gen_range(2..12));
        let corpus = random_corpus(&mut r, n, m, 4, 0.8);
        let config = SelectorConfig {
            isac_k: 1,
            ..SelectorConfig::default()
        };
        let isac = SelectorModel::fit(Algorithm::Isac, &corpus, &config, trial).unwrap();
        let gb = SelectorModel::fit(Algorithm::GbAvgPerf, &corpus, &config, trial).unwrap();
        let query: Vec<f64> = (0..4).map(|_| r.gen_range(-3.0..3.0)).collect();
        assert_eq!(isac.predict(&query).unwrap(), gb.predict(&query).unwrap());
        let direct = gb_avgperf(&corpus.perf);
        let from_model = gb.predict(&query).unwrap();
        for (a, b) in direct.iter().zip(&from_model) {
            assert!(*a == *b || (!a.is_finite() && *b == UNOBSERVED_SCORE));
        }
    }
}

#[test]
fn argosmart_returns_the_training_row() {
    let mut r = StdRng::seed_from_u64(2);
    for trial in 0..20 {
        let (n, m) = (r.gen_range(2..30), r.gen_range(2..12));
        let corpus = random_corpus(&mut r, n, m, 5, 1.0);
        let model = SelectorModel::fit(Algorithm::ArgoSmart, &corpus, &SelectorConfig::default(), trial).unwrap();
        let i = r.gen_range(0..corpus.n());
        let scores = model.predict(corpus.features.row(i)).unwrap();
        assert_eq!(scores, corpus.perf.row_values(i));
    }
}

#[test]
fn every_selector_is_finite_and_serializable() {
    let mut r = StdRng::seed_from_u64(3);
    let corpus = random_corpus(&mut r, 24, 7, 5, 0.6);
    let config = SelectorConfig {
        epochs: 40,
        n_trees: 10,
        ..SelectorConfig::default()
    };
    let dir = tempfile::tempdir().unwrap();
    for algorithm in Algorithm::ALL {
        let model = SelectorModel::fit(algorithm, &corpus, &config, 5).unwrap();
        let query = corpus.features.row(3).to_vec();
        let scores = model.predict(&query).unwrap();
        assert_eq!(scores.len(), 7);
        assert!(scores.iter().all(|s| s.is_finite()), "{algorithm}");
        let path = dir.path().join(algorithm.as_str());
        model.save(&path).unwrap();
        let loaded = SelectorModel::load(&path).unwrap();
        assert_eq!(loaded.predict(&query).unwrap(), scores, "{algorithm}");
        assert!(model.predict(&[0.0; 3]).is_err());
    }
}

#[test]
fn random_selection_is_deterministic_per_query() {
    let a = random_scores(10, 4, &[1.0, 2.0]);
    assert_eq!(a, random_scores(10, 4, &[1.0, 2.0]));
    assert_ne!(a, random_scores(10, 4, &[1.0, 2.5]));
    assert_ne!(a, random_scores(10, 5, &[1.0, 2.0]));
}

#[test]
fn gradients_match_finite_differences() {
    let mut r = StdRng::seed_from_u64(4);
    let (n, m, d) = (7, 5, 4);
    let x = Matrix::from_vec(n, d, (0..n * d).map(|_| r.gen_range(-2.0..2.0)).collect());
    let y = Matrix::from_vec(n, m, (0..n * m).map(|_| r.gen::<f64>()).collect());
    let mask: Vec<bool> = (0..n * m).map(|_| r.gen_bool(0.7)).collect();
    let u = Matrix::from_vec(n, 3, (0..n * 3).map(|_| r.gen::<f64>()).collect());

    let s2 = S2Objective::new(x.clone(), y.clone(), mask.clone(), 6, 2);
    let alors = AlorsObjective::new(x.clone(), u, 6, 2);
    let ncf = NcfObjective::new(x.clone(), &y, &mask, 3, 5, 2);
    let metagl = MetaGlObjective::new(x, &y, &mask, 4, 3);
    for seed in 0..3 {
        for (name, err) in [
            ("s2", common::finite_difference_error(&s2, &s2.init_params(seed), 1e-6, 1e-7)),
            ("alors", common::finite_difference_error(&alors, &alors.init_params(seed), 1e-6, 1e-7)),
            ("ncf", common::finite_difference_error(&ncf, &ncf.init_params(seed), 1e-6, 1e-7)),
            ("metagl", common::finite_difference_error(&metagl, &metagl.init_params(seed), 1e-6, 1e-7)),
        ] {
            assert!(err < 1e-4, "{name} seed {seed}: {err}");
        }
    }
}

#[test]
fn metrics_match_reference_definitions() {
    let mut r = StdRng::seed_from_u64(5);
    for _ in 0..300 {
        let m = r.gen_range(1..30);
        let tied = r.gen_bool(0.5);
        let draw = |r: &mut StdRng| if tied { r.gen_range(0..4) as f64 } else { r.gen::<f64>() };
        let scores: Vec<f64> = (0..m).map(|_| draw(&mut r)).collect();
        let perfs: Vec<f64> = (0..m).map(|_| draw(&mut r)).collect();
        let best = r.gen_range(0..m);
        assert!((top1_auc(&scores, best) - common::reference_auc(&scores, best)).abs() < 1e-12);
        assert!((mrr(&scores, best) - common::reference_mrr(&scores, best)).abs() < 1e-12);
        assert!((ndcg_at_1(&scores, &perfs) - common::reference_ndcg1(&scores, &perfs)).abs() < 1e-12);
    }
}

#[test]
fn ranking_orders_descending_with_stable_ties() {
    assert_eq!(ranking(&[0.2, 0.9, 0.2, 0.5]), vec![1, 3, 0, 2]);
    assert_eq!(ranking(&[UNOBSERVED_SCORE, 0.0]), vec![1, 0]);
}
