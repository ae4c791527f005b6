//! MetaGL-lite: message passing over a graph–model network, trained with a
//! listwise top-1 loss on graph/model embedding dot products.
//!
//! Relations:
//! - graph ← graph: top-k cosine neighbours on z-scored meta-features, mean-normalized
//! - model ← graph: observed performance, normalized by the model's observation count
//! - model ← model: top-k cosine neighbours on mean-filled performance columns
//!
//! Graph nodes aggregate only from graphs, so a query graph attached by
//! feature similarity at predict time follows the training computation.
//! Layer 1 applies ReLU; layer 2 is linear so scores can take either sign.

use rand::Rng as _;
use serde::{Deserialize, Serialize};

use super::scaler::Scaler;
use super::train::{listnet_loss, softmax, train, Objective};
use super::{SelectorConfig, TrainCorpus};
use crate::error::Result;
use crate::linalg::{cosine, dot, Matrix, SparseRows};
use crate::rng;

/// Indices of the `min(k, n−1)` rows most cosine-similar to each row,
/// excluding the row itself; ties go to the lower index.
pub fn top_k_neighbors(x: &Matrix, k: usize) -> Vec<Vec<usize>> {
    let n = x.rows();
    (0..n)
        .map(|i| {
            let sims: Vec<(usize, f64)> = (0..n).filter(|&j| j != i).map(|j| (j, cosine(x.row(i), x.row(j)))).collect();
            take_top(sims, k)
        })
        .collect()
}

fn take_top(mut sims: Vec<(usize, f64)>, k: usize) -> Vec<usize> {
    sims.sort_by(|a, b| b.1.total_cmp(&a.1).then(a.0.cmp(&b.0)));
    sims.truncate(k);
    sims.into_iter().map(|(j, _)| j).collect()
}

fn mean_rows(cols: usize, lists: &[Vec<usize>]) -> SparseRows {
    SparseRows::new(
        cols,
        lists
            .iter()
            .map(|l| {
                let w = 1.0 / l.len().max(1) as f64;
                l.iter().map(|&j| (j, w)).collect()
            })
            .collect(),
    )
}

fn relu_mask(d: &mut Matrix, pre: &Matrix) {
    for (g, z) in d.data_mut().iter_mut().zip(pre.data()) {
        if *z <= 0.0 {
            *g = 0.0;
        }
    }
}

const N_PARAMS: usize = 17;
// parameter slots
const W_IN: usize = 0;
const B_IN: usize = 1;
const EMB: usize = 2;
const WS_G1: usize = 3;
const WGG1: usize = 4;
const BG1: usize = 5;
const WS_M1: usize = 6;
const WGM1: usize = 7;
const WMM1: usize = 8;
const BM1: usize = 9;
const WS_G2: usize = 10;
const WGG2: usize = 11;
const BG2: usize = 12;
const WS_M2: usize = 13;
const WGM2: usize = 14;
const WMM2: usize = 15;
const BM2: usize = 16;

pub struct MetaGlObjective {
    pub dim: usize,
    x: Matrix,
    gg: SparseRows,
    mg: SparseRows,
    mm: SparseRows,
    /// Observed (model indices, values) per graph row.
    rows: Vec<(Vec<usize>, Vec<f64>)>,
}

struct Forward {
    h0g: Matrix,
    agg0: Matrix,
    z1g: Matrix,
    h1g: Matrix,
    mg0: Matrix,
    mm0: Matrix,
    z1m: Matrix,
    h1m: Matrix,
    agg1: Matrix,
    h2g: Matrix,
    mg1: Matrix,
    mm1: Matrix,
    h2m: Matrix,
}

fn affine(terms: &[(&Matrix, &Matrix)], bias: &Matrix) -> Matrix {
    let mut out = terms[0].0.matmul(terms[0].1);
    for (x, w) in &terms[1..] {
        out.add_assign(&x.matmul(w));
    }
    out.add_row_broadcast(bias);
    out
}

impl MetaGlObjective {
    /// `x` is the z-scored feature matrix; `y`/`mask` the performances.
    pub fn new(x: Matrix, y: &Matrix, mask: &[bool], dim: usize, top_k: usize) -> Self {
        let (n, m) = y.shape();
        let gg = mean_rows(n, &top_k_neighbors(&x, top_k));

        let mut mg_rows = vec![Vec::new(); m];
        let mut col_sum = vec![0.0; m];
        let mut col_count = vec![0usize; m];
        for i in 0..n {
            for j in 0..m {
                if mask[i * m + j] {
                    mg_rows[j].push((i, y.get(i, j)));
                    col_sum[j] += y.get(i, j);
                    col_count[j] += 1;
                }
            }
        }
        for (row, &c) in mg_rows.iter_mut().zip(&col_count) {
            row.iter_mut().for_each(|(_, w)| *w /= c.max(1) as f64);
        }
        let mg = SparseRows::new(n, mg_rows);

        let mut columns = Matrix::zeros(m, n);
        for j in 0..m {
            let fill = if col_count[j] > 0 { col_sum[j] / col_count[j] as f64 } else { 0.0 };
            for i in 0..n {
                columns.set(j, i, if mask[i * m + j] { y.get(i, j) } else { fill });
            }
        }
        let mm = mean_rows(m, &top_k_neighbors(&columns, top_k));

        let rows = (0..n)
            .map(|i| {
                let cols: Vec<usize> = (0..m).filter(|&j| mask[i * m + j]).collect();
                let vals = cols.iter().map(|&j| y.get(i, j)).collect();
                (cols, vals)
            })
            .collect();
        MetaGlObjective { dim, x, gg, mg, mm, rows }
    }

    pub fn init_params(&self, seed: u64) -> Vec<Matrix> {
        let mut r = rng::seeded(seed);
        let e = self.dim;
        let mut glorot = |rows: usize, cols: usize| {
            let limit = (6.0 / (rows + cols) as f64).sqrt();
            Matrix::from_vec(rows, cols, (0..rows * cols).map(|_| r.gen_range(-limit..limit)).collect())
        };
        let m = self.mg.n_rows();
        let mut params = Vec::with_capacity(N_PARAMS);
        params.push(glorot(self.x.cols(), e));
        params.push(Matrix::zeros(1, e));
        params.push(glorot(m, e));
        for slot in WS_G1..N_PARAMS {
            params.push(if matches!(slot, BG1 | BM1 | BG2 | BM2) {
                Matrix::zeros(1, e)
            } else {
                glorot(e, e)
            });
        }
        params
    }

    fn forward(&self, p: &[Matrix]) -> Forward {
        let h0g = affine(&[(&self.x, &p[W_IN])], &p[B_IN]);
        let h0m = &p[EMB];
        let agg0 = self.gg.mul(&h0g);
        let z1g = affine(&[(&h0g, &p[WS_G1]), (&agg0, &p[WGG1])], &p[BG1]);
        let h1g = z1g.map(|v| v.max(0.0));
        let mg0 = self.mg.mul(&h0g);
        let mm0 = self.mm.mul(h0m);
        let z1m = affine(&[(h0m, &p[WS_M1]), (&mg0, &p[WGM1]), (&mm0, &p[WMM1])], &p[BM1]);
        let h1m = z1m.map(|v| v.max(0.0));
        let agg1 = self.gg.mul(&h1g);
        let h2g = affine(&[(&h1g, &p[WS_G2]), (&agg1, &p[WGG2])], &p[BG2]);
        let mg1 = self.mg.mul(&h1g);
        let mm1 = self.mm.mul(&h1m);
        let h2m = affine(&[(&h1m, &p[WS_M2]), (&mg1, &p[WGM2]), (&mm1, &p[WMM2])], &p[BM2]);
        Forward {
            h0g,
            agg0,
            z1g,
            h1g,
            mg0,
            mm0,
            z1m,
            h1m,
            agg1,
            h2g,
            mg1,
            mm1,
            h2m,
        }
    }

    /// Training-graph score matrix `H2g · H2mᵀ`.
    pub fn scores(&self, params: &[Matrix]) -> Matrix {
        let f = self.forward(params);
        f.h2g.matmul_t(&f.h2m)
    }
}

impl Objective for MetaGlObjective {
    fn loss_grad(&self, p: &[Matrix]) -> (f64, Vec<Matrix>) {
        let f = self.forward(p);
        let s = f.h2g.matmul_t(&f.h2m);
        let m = s.cols();
        let active = self.rows.iter().filter(|(c, _)| !c.is_empty()).count().max(1) as f64;
        let mut loss = 0.0;
        let mut ds = Matrix::zeros(s.rows(), m);
        for (i, (cols, vals)) in self.rows.iter().enumerate() {
            if cols.is_empty() {
                continue;
            }
            let row: Vec<f64> = cols.iter().map(|&j| s.get(i, j)).collect();
            let (l, g) = listnet_loss(&row, vals);
            loss += l / active;
            for (&j, gv) in cols.iter().zip(g) {
                ds.set(i, j, gv / active);
            }
        }

        let mut grads: Vec<Matrix> = vec![Matrix::zeros(0, 0); N_PARAMS];
        let dh2g = ds.matmul(&f.h2m);
        let dh2m = ds.t_matmul(&f.h2g);

        // layer 2
        grads[WS_G2] = f.h1g.t_matmul(&dh2g);
        grads[WGG2] = f.agg1.t_matmul(&dh2g);
        grads[BG2] = dh2g.col_sums();
        let mut dh1g = dh2g.matmul_t(&p[WS_G2]);
        dh1g.add_assign(&self.gg.t_mul(&dh2g.matmul_t(&p[WGG2])));

        grads[WS_M2] = f.h1m.t_matmul(&dh2m);
        grads[WGM2] = f.mg1.t_matmul(&dh2m);
        grads[WMM2] = f.mm1.t_matmul(&dh2m);
        grads[BM2] = dh2m.col_sums();
        let mut dh1m = dh2m.matmul_t(&p[WS_M2]);
        dh1m.add_assign(&self.mm.t_mul(&dh2m.matmul_t(&p[WMM2])));
        dh1g.add_assign(&self.mg.t_mul(&dh2m.matmul_t(&p[WGM2])));

        // layer 1
        relu_mask(&mut dh1g, &f.z1g);
        relu_mask(&mut dh1m, &f.z1m);
        let (dz1g, dz1m) = (dh1g, dh1m);
        grads[WS_G1] = f.h0g.t_matmul(&dz1g);
        grads[WGG1] = f.agg0.t_matmul(&dz1g);
        grads[BG1] = dz1g.col_sums();
        let mut dh0g = dz1g.matmul_t(&p[WS_G1]);
        dh0g.add_assign(&self.gg.t_mul(&dz1g.matmul_t(&p[WGG1])));

        grads[WS_M1] = p[EMB].t_matmul(&dz1m);
        grads[WGM1] = f.mg0.t_matmul(&dz1m);
        grads[WMM1] = f.mm0.t_matmul(&dz1m);
        grads[BM1] = dz1m.col_sums();
        let mut dh0m = dz1m.matmul_t(&p[WS_M1]);
        dh0m.add_assign(&self.mm.t_mul(&dz1m.matmul_t(&p[WMM1])));
        dh0g.add_assign(&self.mg.t_mul(&dz1m.matmul_t(&p[WGM1])));

        // input
        grads[EMB] = dh0m;
        grads[W_IN] = self.x.t_matmul(&dh0g);
        grads[B_IN] = dh0g.col_sums();
        (loss, grads)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MetaGlState {
    pub scaler: Scaler,
    pub top_k: usize,
    /// z-scored training features, used to attach queries.
    pub z_train: Matrix,
    pub h0g: Matrix,
    pub h1g: Matrix,
    pub h2m: Matrix,
    /// Graph-side parameters: W_in, b_in, Ws_g1, Wgg1, bg1, Ws_g2, Wgg2, bg2.
    pub graph_params: Vec<Matrix>,
}

impl MetaGlState {
    pub fn fit(corpus: &TrainCorpus, config: &SelectorConfig, seed: u64) -> Result<Self> {
        let scaler = Scaler::fit(&corpus.features);
        let z = scaler.transform_matrix(&corpus.features);
        let (y, mask) = corpus.perf_dense();
        let obj = MetaGlObjective::new(z.clone(), &y, &mask, config.latent.max(1), config.top_k.max(1));
        let mut params = obj.init_params(seed);
        let stats = train(&obj, &mut params, &config.train_options())?;
        log::debug!("metagl_lite: {} epochs, loss {:.4}", stats.epochs_run, stats.final_loss());
        let f = obj.forward(&params);
        let graph_params = [W_IN, B_IN, WS_G1, WGG1, BG1, WS_G2, WGG2, BG2]
            .iter()
            .map(|&k| params[k].clone())
            .collect();
        Ok(MetaGlState {
            scaler,
            top_k: config.top_k.max(1),
            z_train: z,
            h0g: f.h0g,
            h1g: f.h1g,
            h2m: f.h2m,
            graph_params,
        })
    }

    pub fn predict(&self, query: &[f64]) -> Vec<f64> {
        let q = self.scaler.transform(query);
        let sims: Vec<(usize, f64)> = self.z_train.iter_rows().enumerate().map(|(i, r)| (i, cosine(&q, r))).collect();
        let nbrs = take_top(sims, self.top_k);
        let mean_of = |h: &Matrix| {
            let mut out = Matrix::zeros(1, h.cols());
            for &j in &nbrs {
                for (o, v) in out.data_mut().iter_mut().zip(h.row(j)) {
                    *o += v;
                }
            }
            out.scale(1.0 / nbrs.len().max(1) as f64);
            out
        };
        let p = &self.graph_params;
        let x = Matrix::from_vec(1, q.len(), q.clone());
        let h0 = affine(&[(&x, &p[0])], &p[1]);
        let h1 = affine(&[(&h0, &p[2]), (&mean_of(&self.h0g), &p[3])], &p[4]).map(|v| v.max(0.0));
        let h2 = affine(&[(&h1, &p[5]), (&mean_of(&self.h1g), &p[6])], &p[7]);
        self.h2m.iter_rows().map(|mrow| dot(h2.row(0), mrow)).collect()
    }

    /// Top-1 probabilities implied by the scores.
    pub fn top1_probabilities(&self, query: &[f64]) -> Vec<f64> {
        softmax(&self.predict(query))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::perf::PerformanceMatrix;
    use crate::selectors::train::gradcheck;

    fn random_problem(seed: u64, n: usize, m: usize, d: usize) -> (Matrix, Matrix, Vec<bool>) {
        let mut r = rng::seeded(seed);
        let x = Matrix::from_vec(n, d, (0..n * d).map(|_| r.gen_range(-2.0..2.0)).collect());
        let y = Matrix::from_vec(n, m, (0..n * m).map(|_| r.gen_range(0.0..1.0)).collect());
        let mask = (0..n * m).map(|_| r.gen_bool(0.7)).collect();
        (x, y, mask)
    }

    #[test]
    fn neighbor_lists() {
        let (x, _, _) = random_problem(1, 40, 3, 4);
        for (i, l) in top_k_neighbors(&x, 30).iter().enumerate() {
            assert_eq!(l.len(), 30);
            assert!(!l.contains(&i));
        }
        let (x, _, _) = random_problem(1, 10, 3, 4);
        assert!(top_k_neighbors(&x, 30).iter().all(|l| l.len() == 9));
    }

    #[test]
    fn gradient_check() {
        let (x, y, mask) = random_problem(3, 7, 5, 4);
        let obj = MetaGlObjective::new(x, &y, &mask, 4, 3);
        for seed in 0..3 {
            let (err, checked) = gradcheck::max_relative_error(&obj, &obj.init_params(seed), 1e-6, 1e-6);
            assert!(checked > 0);
            assert!(err < 1e-4, "seed {seed}: {err}");
        }
    }

    #[test]
    fn probabilities_sum_to_one() {
        let (x, y, _) = random_problem(4, 12, 6, 3);
        let rows: Vec<Vec<f64>> = y.iter_rows().map(|r| r.to_vec()).collect();
        let perf = PerformanceMatrix::from_rows(
            (0..12).map(|i| format!("g{i}")).collect(),
            (0..6).map(|j| format!("m{j}")).collect(),
            &rows,
        )
        .unwrap();
        let corpus = TrainCorpus::new(x.clone(), perf).unwrap();
        let config = SelectorConfig {
            epochs: 30,
            ..SelectorConfig::default()
        };
        let state = MetaGlState::fit(&corpus, &config, 2).unwrap();
        for i in 0..12 {
            let p = state.top1_probabilities(x.row(i));
            assert!((p.iter().sum::<f64>() - 1.0).abs() < 1e-9);
        }
    }
}
