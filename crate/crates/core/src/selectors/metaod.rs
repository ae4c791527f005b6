//! MetaOD-style selector: factors learned under a listwise top-1 objective,
//! then a random forest regressing meta-features onto graph factors.

use rand::Rng as _;
use serde::{Deserialize, Serialize};

use super::forest::{ForestParams, RandomForest};
use super::scaler::Scaler;
use super::train::{listnet_loss, train, Objective};
use super::{SelectorConfig, TrainCorpus};
use crate::error::Result;
use crate::linalg::{dot, Matrix};
use crate::rng;

/// Sum over rows of the ListNet cross-entropy between softmax(observed
/// performances) and softmax(U_i · Vᵀ) restricted to the observed models.
/// Parameters are `[U (n×r), V (m×r)]`. Rows are summed rather than averaged
/// so each graph factor gets an O(1) gradient regardless of corpus size.
pub struct MetaOdObjective {
    pub n: usize,
    pub m: usize,
    pub rank: usize,
    /// Observed (model indices, values) per row.
    rows: Vec<(Vec<usize>, Vec<f64>)>,
}

impl MetaOdObjective {
    pub fn new(y: &Matrix, mask: &[bool], rank: usize) -> Self {
        let (n, m) = y.shape();
        let rows = (0..n)
            .map(|i| {
                let cols: Vec<usize> = (0..m).filter(|&j| mask[i * m + j]).collect();
                let vals = cols.iter().map(|&j| y.get(i, j)).collect();
                (cols, vals)
            })
            .collect();
        MetaOdObjective { n, m, rank, rows }
    }

    pub fn init_params(&self, seed: u64) -> Vec<Matrix> {
        let mut r = rng::seeded(seed);
        let mut init = |rows: usize| Matrix::from_vec(rows, self.rank, (0..rows * self.rank).map(|_| r.gen_range(-0.1..0.1)).collect());
        let u = init(self.n);
        let v = init(self.m);
        vec![u, v]
    }
}

impl Objective for MetaOdObjective {
    fn loss_grad(&self, params: &[Matrix]) -> (f64, Vec<Matrix>) {
        let (u, v) = (&params[0], &params[1]);
        let mut du = Matrix::zeros(self.n, self.rank);
        let mut dv = Matrix::zeros(self.m, self.rank);
        let mut loss = 0.0;
        for (i, (cols, vals)) in self.rows.iter().enumerate() {
            if cols.is_empty() {
                continue;
            }
            let scores: Vec<f64> = cols.iter().map(|&j| dot(u.row(i), v.row(j))).collect();
            let (l, g) = listnet_loss(&scores, vals);
            loss += l;
            for (&j, gs) in cols.iter().zip(g) {
                for k in 0..self.rank {
                    du.row_mut(i)[k] += gs * v.get(j, k);
                    dv.row_mut(j)[k] += gs * u.get(i, k);
                }
            }
        }
        (loss, vec![du, dv])
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MetaOdState {
    pub scaler: Scaler,
    pub forest: RandomForest,
    pub v: Matrix,
}

impl MetaOdState {
    pub fn fit(corpus: &TrainCorpus, config: &SelectorConfig, seed: u64) -> Result<Self> {
        let (y, mask) = corpus.perf_dense();
        let rank = config.latent.max(1);
        let obj = MetaOdObjective::new(&y, &mask, rank);
        let mut params = obj.init_params(rng::derive(seed, 1));
        let stats = train(&obj, &mut params, &config.train_options())?;
        log::debug!("metaod: {} epochs, loss {:.4}", stats.epochs_run, stats.final_loss());
        let v = params.pop().expect("two factors");
        let u = params.pop().expect("two factors");

        let scaler = Scaler::fit(&corpus.features);
        let forest = RandomForest::fit(
            &scaler.transform_matrix(&corpus.features),
            &u,
            &ForestParams {
                n_trees: config.n_trees.max(1),
                max_depth: config.max_depth,
                bootstrap: true,
            },
            rng::derive(seed, 2),
        );
        Ok(MetaOdState { scaler, forest, v })
    }

    pub fn predict(&self, query: &[f64]) -> Vec<f64> {
        let u = self.forest.predict(&self.scaler.transform(query));
        self.v.iter_rows().map(|v| dot(&u, v)).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::selectors::train::gradcheck;

    #[test]
    fn gradient_check() {
        let mut r = rng::seeded(2);
        let (n, m) = (5, 7);
        let y = Matrix::from_vec(n, m, (0..n * m).map(|_| r.gen_range(0.0..1.0)).collect());
        let mask: Vec<bool> = (0..n * m).map(|_| r.gen_bool(0.7)).collect();
        let obj = MetaOdObjective::new(&y, &mask, 3);
        for seed in 0..3 {
            let (err, checked) = gradcheck::max_relative_error(&obj, &obj.init_params(seed), 1e-6, 1e-6);
            assert!(checked > 0);
            assert!(err < 1e-4, "seed {seed}: {err}");
        }
    }
}
