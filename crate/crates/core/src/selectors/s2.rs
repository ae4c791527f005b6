//! S2: a feedforward surrogate regressing the whole performance row from meta-features.

use serde::{Deserialize, Serialize};

use super::mlp::Mlp;
use super::scaler::Scaler;
use super::train::{masked_mse, train, Objective};
use super::{SelectorConfig, TrainCorpus};
use crate::error::Result;
use crate::linalg::Matrix;
use crate::rng;

/// Masked squared error between network outputs and observed performances.
pub struct S2Objective {
    pub mlp: Mlp,
    x: Matrix,
    y: Matrix,
    mask: Vec<bool>,
}

impl S2Objective {
    /// `x` should already be z-scored.
    pub fn new(x: Matrix, y: Matrix, mask: Vec<bool>, hidden: usize, hidden_layers: usize) -> Self {
        let mlp = Mlp::new(x.cols(), hidden, hidden_layers, y.cols());
        S2Objective { mlp, x, y, mask }
    }

    pub fn init_params(&self, seed: u64) -> Vec<Matrix> {
        self.mlp.init(&mut rng::seeded(seed))
    }
}

impl Objective for S2Objective {
    fn loss_grad(&self, params: &[Matrix]) -> (f64, Vec<Matrix>) {
        let cache = self.mlp.forward(params, &self.x);
        let (loss, d_out) = masked_mse(cache.output(), &self.y, &self.mask);
        (loss, self.mlp.backward(params, &cache, d_out).0)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct S2State {
    pub scaler: Scaler,
    /// Per-model standardization of the regression targets.
    pub target_scaler: Scaler,
    pub mlp: Mlp,
    pub params: Vec<Matrix>,
}

impl S2State {
    pub fn fit(corpus: &TrainCorpus, config: &SelectorConfig, seed: u64) -> Result<Self> {
        let scaler = Scaler::fit(&corpus.features);
        let (y, mask) = corpus.perf_dense();
        let target_scaler = Scaler::fit_masked(&y, &mask);
        let y = target_scaler.transform_matrix(&y);
        let obj = S2Objective::new(scaler.transform_matrix(&corpus.features), y, mask, config.hidden, config.hidden_layers);
        let mut params = obj.init_params(seed);
        let stats = train(&obj, &mut params, &config.train_options())?;
        log::debug!("s2: {} epochs, loss {:.3e}", stats.epochs_run, stats.final_loss());
        Ok(S2State {
            scaler,
            target_scaler,
            mlp: obj.mlp,
            params,
        })
    }

    pub fn predict(&self, query: &[f64]) -> Vec<f64> {
        let x = Matrix::from_vec(1, query.len(), self.scaler.transform(query));
        self.target_scaler.inverse(self.mlp.predict(&self.params, &x).data())
    }
}
