//! NCF: graph factors regressed from meta-features, free model factors, and
//! a network scoring each (graph factor, model factor) pair.

use rand::Rng as _;
use serde::{Deserialize, Serialize};

use super::mlp::Mlp;
use super::scaler::Scaler;
use super::train::{train, Objective};
use super::{SelectorConfig, TrainCorpus};
use crate::error::Result;
use crate::linalg::Matrix;
use crate::rng;

/// Parameters are laid out as `[encoder..., V, scorer...]`.
pub struct NcfObjective {
    pub encoder: Mlp,
    pub scorer: Mlp,
    pub latent: usize,
    pub n_models: usize,
    x: Matrix,
    /// Observed cells as (graph, model, value).
    cells: Vec<(usize, usize, f64)>,
}

impl NcfObjective {
    pub fn new(x: Matrix, y: &Matrix, mask: &[bool], latent: usize, hidden: usize, hidden_layers: usize) -> Self {
        let m = y.cols();
        let cells = (0..y.rows())
            .flat_map(|i| (0..m).map(move |j| (i, j)))
            .filter(|&(i, j)| mask[i * m + j])
            .map(|(i, j)| (i, j, y.get(i, j)))
            .collect();
        NcfObjective {
            encoder: Mlp::new(x.cols(), hidden, hidden_layers, latent),
            scorer: Mlp::new(2 * latent, hidden, 1, 1),
            latent,
            n_models: m,
            x,
            cells,
        }
    }

    pub fn init_params(&self, seed: u64) -> Vec<Matrix> {
        let mut r = rng::seeded(seed);
        let mut params = self.encoder.init(&mut r);
        let limit = (6.0 / (self.n_models + self.latent) as f64).sqrt();
        let v = (0..self.n_models * self.latent).map(|_| r.gen_range(-limit..limit)).collect();
        params.push(Matrix::from_vec(self.n_models, self.latent, v));
        params.extend(self.scorer.init(&mut r));
        params
    }

    fn split<'a>(&self, params: &'a [Matrix]) -> (&'a [Matrix], &'a Matrix, &'a [Matrix]) {
        let e = self.encoder.n_params();
        (&params[..e], &params[e], &params[e + 1..])
    }

    /// Scorer inputs `[g_i, v_j]` for the given pairs.
    fn pair_inputs(&self, g: &Matrix, v: &Matrix, pairs: impl Iterator<Item = (usize, usize)>) -> Matrix {
        let mut data = Vec::new();
        let mut rows = 0;
        for (i, j) in pairs {
            data.extend_from_slice(g.row(i));
            data.extend_from_slice(v.row(j));
            rows += 1;
        }
        Matrix::from_vec(rows, 2 * self.latent, data)
    }
}

impl Objective for NcfObjective {
    fn loss_grad(&self, params: &[Matrix]) -> (f64, Vec<Matrix>) {
        let (enc, v, sc) = self.split(params);
        let enc_cache = self.encoder.forward(enc, &self.x);
        let g = enc_cache.output();
        let inputs = self.pair_inputs(g, v, self.cells.iter().map(|&(i, j, _)| (i, j)));
        let sc_cache = self.scorer.forward(sc, &inputs);
        let out = sc_cache.output();

        let count = self.cells.len().max(1) as f64;
        let mut loss = 0.0;
        let mut d_out = Matrix::zeros(self.cells.len(), 1);
        for (k, &(_, _, y)) in self.cells.iter().enumerate() {
            let r = out.get(k, 0) - y;
            loss += r * r;
            d_out.set(k, 0, 2.0 * r / count);
        }
        let (sc_grads, d_in) = self.scorer.backward(sc, &sc_cache, d_out);

        let mut dg = Matrix::zeros(g.rows(), self.latent);
        let mut dv = Matrix::zeros(self.n_models, self.latent);
        for (k, &(i, j, _)) in self.cells.iter().enumerate() {
            let row = d_in.row(k);
            for (a, b) in dg.row_mut(i).iter_mut().zip(&row[..self.latent]) {
                *a += b;
            }
            for (a, b) in dv.row_mut(j).iter_mut().zip(&row[self.latent..]) {
                *a += b;
            }
        }
        let (mut grads, _) = self.encoder.backward(enc, &enc_cache, dg);
        grads.push(dv);
        grads.extend(sc_grads);
        (loss / count, grads)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NcfState {
    pub scaler: Scaler,
    pub target_scaler: Scaler,
    pub encoder: Mlp,
    pub scorer: Mlp,
    pub params: Vec<Matrix>,
}

impl NcfState {
    pub fn fit(corpus: &TrainCorpus, config: &SelectorConfig, seed: u64) -> Result<Self> {
        let scaler = Scaler::fit(&corpus.features);
        let (y, mask) = corpus.perf_dense();
        let target_scaler = Scaler::fit_masked(&y, &mask);
        let y = target_scaler.transform_matrix(&y);
        let obj = NcfObjective::new(
            scaler.transform_matrix(&corpus.features),
            &y,
            &mask,
            config.latent,
            config.hidden,
            config.hidden_layers,
        );
        let mut params = obj.init_params(seed);
        let stats = train(&obj, &mut params, &config.train_options())?;
        log::debug!("ncf: {} epochs, loss {:.3e}", stats.epochs_run, stats.final_loss());
        Ok(NcfState {
            scaler,
            target_scaler,
            encoder: obj.encoder,
            scorer: obj.scorer,
            params,
        })
    }

    pub fn predict(&self, query: &[f64]) -> Vec<f64> {
        let e = self.encoder.n_params();
        let (enc, v, sc) = (&self.params[..e], &self.params[e], &self.params[e + 1..]);
        let x = Matrix::from_vec(1, query.len(), self.scaler.transform(query));
        let g = self.encoder.predict(enc, &x);
        let latent = v.cols();
        let mut data = Vec::with_capacity(v.rows() * 2 * latent);
        for j in 0..v.rows() {
            data.extend_from_slice(g.row(0));
            data.extend_from_slice(v.row(j));
        }
        let z = self.scorer.predict(sc, &Matrix::from_vec(v.rows(), 2 * latent, data));
        self.target_scaler.inverse(z.data())
    }
}
