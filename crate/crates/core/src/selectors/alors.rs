//! ALORS: nonnegative factorization of the performance matrix plus a
//! regressor from meta-features to graph factors.

use serde::{Deserialize, Serialize};

use super::mlp::Mlp;
use super::nmf::nmf;
use super::scaler::Scaler;
use super::train::{masked_mse, train, Objective};
use super::{SelectorConfig, TrainCorpus};
use crate::error::Result;
use crate::linalg::{dot, Matrix};
use crate::rng;

/// Squared error between regressed and factorized graph factors.
pub struct AlorsObjective {
    pub mlp: Mlp,
    x: Matrix,
    u: Matrix,
    mask: Vec<bool>,
}

impl AlorsObjective {
    pub fn new(x: Matrix, u: Matrix, hidden: usize, hidden_layers: usize) -> Self {
        let mlp = Mlp::new(x.cols(), hidden, hidden_layers, u.cols());
        let mask = vec![true; u.data().len()];
        AlorsObjective { mlp, x, u, mask }
    }

    pub fn init_params(&self, seed: u64) -> Vec<Matrix> {
        self.mlp.init(&mut rng::seeded(seed))
    }
}

impl Objective for AlorsObjective {
    fn loss_grad(&self, params: &[Matrix]) -> (f64, Vec<Matrix>) {
        let cache = self.mlp.forward(params, &self.x);
        let (loss, d_out) = masked_mse(cache.output(), &self.u, &self.mask);
        (loss, self.mlp.backward(params, &cache, d_out).0)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AlorsState {
    pub scaler: Scaler,
    pub target_scaler: Scaler,
    pub mlp: Mlp,
    pub params: Vec<Matrix>,
    /// Model factors, `m × rank`.
    pub v: Matrix,
    /// Constant added to the performances before factorization.
    pub shift: f64,
}

impl AlorsState {
    pub fn fit(corpus: &TrainCorpus, config: &SelectorConfig, seed: u64) -> Result<Self> {
        let (mut p, mask) = corpus.perf_dense();
        let min = p
            .data()
            .iter()
            .zip(&mask)
            .filter(|(_, &o)| o)
            .map(|(&v, _)| v)
            .fold(f64::INFINITY, f64::min);
        let shift = if min < 0.0 { -min } else { 0.0 };
        p.data_mut().iter_mut().zip(&mask).filter(|(_, &o)| o).for_each(|(v, _)| *v += shift);

        let rank = config.latent.min(corpus.n()).min(corpus.m()).max(1);
        let factors = nmf(&p, &mask, rank, rng::derive(seed, 1), config.nmf_max_iter)?;

        let scaler = Scaler::fit(&corpus.features);
        // graph factors are small next to the model factors; regress them standardized
        let target_scaler = Scaler::fit(&factors.u);
        let obj = AlorsObjective::new(
            scaler.transform_matrix(&corpus.features),
            target_scaler.transform_matrix(&factors.u),
            config.hidden,
            config.hidden_layers,
        );
        let mut params = obj.init_params(rng::derive(seed, 2));
        let stats = train(&obj, &mut params, &config.train_options())?;
        log::debug!("alors: rank {rank}, {} epochs, loss {:.3e}", stats.epochs_run, stats.final_loss());
        Ok(AlorsState {
            scaler,
            target_scaler,
            mlp: obj.mlp,
            params,
            v: factors.v,
            shift,
        })
    }

    pub fn predict(&self, query: &[f64]) -> Vec<f64> {
        let x = Matrix::from_vec(1, query.len(), self.scaler.transform(query));
        let z = self.mlp.predict(&self.params, &x);
        let u = self.target_scaler.inverse(z.row(0));
        self.v.iter_rows().map(|v| dot(&u, v) - self.shift).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::perf::PerformanceMatrix;
    use crate::selectors::baselines::average_ranks;
    use crate::selectors::train::gradcheck;
    use rand::Rng as _;

    fn spearman(a: &[f64], b: &[f64]) -> f64 {
        let (ra, rb) = (average_ranks(a), average_ranks(b));
        let n = a.len() as f64;
        let ma = ra.iter().sum::<f64>() / n;
        let mb = rb.iter().sum::<f64>() / n;
        let cov: f64 = ra.iter().zip(&rb).map(|(x, y)| (x - ma) * (y - mb)).sum();
        let va: f64 = ra.iter().map(|x| (x - ma).powi(2)).sum();
        let vb: f64 = rb.iter().map(|y| (y - mb).powi(2)).sum();
        cov / (va * vb).sqrt()
    }

    #[test]
    fn rank_one_reconstruction() {
        let a = [0.2, 0.5, 0.9, 0.4];
        let b = [1.0, 0.3, 0.7, 0.5, 0.8];
        let p: Vec<Vec<f64>> = a.iter().map(|x| b.iter().map(|y| x * y).collect()).collect();
        let mask = vec![true; 20];
        let f = nmf(&Matrix::from_rows(&p), &mask, 1, 3, 5000).unwrap();
        let recon = f.u.matmul_t(&f.v);
        let flat: Vec<f64> = p.concat();
        let rmse = (recon.data().iter().zip(&flat).map(|(x, y)| (x - y).powi(2)).sum::<f64>() / 20.0).sqrt();
        assert!(rmse < 1e-3, "rmse {rmse}");
    }

    #[test]
    fn training_query_recovers_its_row_order() {
        let mut r = rng::seeded(4);
        let (n, m, d) = (30, 12, 6);
        let a = Matrix::from_vec(n, 2, (0..n * 2).map(|_| r.gen_range(0.1..1.0)).collect());
        let b = Matrix::from_vec(m, 2, (0..m * 2).map(|_| r.gen_range(0.1..1.0)).collect());
        let p = a.matmul_t(&b);
        // features carry the latent factors plus nuisance dimensions
        let features: Vec<Vec<f64>> = (0..n)
            .map(|i| {
                let mut f = a.row(i).to_vec();
                f.extend((0..d - 2).map(|_| r.gen_range(-1.0..1.0)));
                f
            })
            .collect();
        let rows: Vec<Vec<f64>> = p.iter_rows().map(|x| x.to_vec()).collect();
        let perf = PerformanceMatrix::from_rows(
            (0..n).map(|i| format!("g{i}")).collect(),
            (0..m).map(|j| format!("m{j}")).collect(),
            &rows,
        )
        .unwrap();
        let corpus = TrainCorpus::new(Matrix::from_rows(&features), perf).unwrap();
        let state = AlorsState::fit(&corpus, &SelectorConfig::default(), 7).unwrap();
        let mut total = 0.0;
        for i in 0..n {
            total += spearman(&state.predict(&features[i]), p.row(i));
        }
        assert!(total / n as f64 > 0.9, "mean spearman {}", total / n as f64);
        assert!(state.v.data().iter().all(|&v| v >= 0.0));
    }

    #[test]
    fn gradient_check() {
        let mut r = rng::seeded(5);
        let (n, d, k) = (8, 5, 3);
        let x = Matrix::from_vec(n, d, (0..n * d).map(|_| r.gen_range(-2.0..2.0)).collect());
        let u = Matrix::from_vec(n, k, (0..n * k).map(|_| r.gen_range(0.0..1.0)).collect());
        let obj = AlorsObjective::new(x, u, 6, 2);
        for seed in 0..3 {
            let (err, checked) = gradcheck::max_relative_error(&obj, &obj.init_params(seed), 1e-6, 1e-6);
            assert!(checked > 0);
            assert!(err < 1e-4, "seed {seed}: {err}");
        }
    }
}
