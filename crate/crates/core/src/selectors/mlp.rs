//! Feedforward network with ReLU hidden layers, linear output and manual
//! backpropagation. Parameters are stored as `[W0, b0, W1, b1, ...]` with
//! `Wk: in×out` and `bk: 1×out`.

use rand::Rng as _;
use serde::{Deserialize, Serialize};

use crate::linalg::Matrix;
use crate::rng::Rng;

const HIDDEN_BIAS_INIT: f64 = 0.01;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Mlp {
    pub sizes: Vec<usize>,
}

pub struct MlpCache {
    /// Layer inputs; `inputs[0]` is the network input.
    inputs: Vec<Matrix>,
    /// Pre-activations of every layer.
    pre: Vec<Matrix>,
}

impl MlpCache {
    pub fn output(&self) -> &Matrix {
        self.pre.last().expect("at least one layer")
    }
}

impl Mlp {
    /// `input → hidden × layers → output`.
    pub fn new(input: usize, hidden: usize, hidden_layers: usize, output: usize) -> Self {
        let mut sizes = vec![input];
        sizes.extend(std::iter::repeat_n(hidden, hidden_layers));
        sizes.push(output);
        Mlp { sizes }
    }

    pub fn n_layers(&self) -> usize {
        self.sizes.len() - 1
    }

    pub fn n_params(&self) -> usize {
        2 * self.n_layers()
    }

    /// He-uniform weights for ReLU layers, Glorot-uniform for the output layer.
    /// Hidden biases start slightly positive so no unit begins exactly at the kink.
    pub fn init(&self, rng: &mut Rng) -> Vec<Matrix> {
        let mut params = Vec::with_capacity(self.n_params());
        for l in 0..self.n_layers() {
            let (fan_in, fan_out) = (self.sizes[l], self.sizes[l + 1]);
            let limit = if l + 1 == self.n_layers() {
                (6.0 / (fan_in + fan_out) as f64).sqrt()
            } else {
                (6.0 / fan_in.max(1) as f64).sqrt()
            };
            let data = (0..fan_in * fan_out).map(|_| rng.gen_range(-limit..limit)).collect();
            params.push(Matrix::from_vec(fan_in, fan_out, data));
            let bias = if l + 1 == self.n_layers() { 0.0 } else { HIDDEN_BIAS_INIT };
            params.push(Matrix::filled(1, fan_out, bias));
        }
        params
    }

    pub fn forward(&self, params: &[Matrix], x: &Matrix) -> MlpCache {
        let mut inputs = Vec::with_capacity(self.n_layers());
        let mut pre = Vec::with_capacity(self.n_layers());
        let mut h = x.clone();
        for l in 0..self.n_layers() {
            let mut z = h.matmul(&params[2 * l]);
            z.add_row_broadcast(&params[2 * l + 1]);
            inputs.push(h);
            h = if l + 1 < self.n_layers() { z.map(relu) } else { z.clone() };
            pre.push(z);
        }
        MlpCache { inputs, pre }
    }

    pub fn predict(&self, params: &[Matrix], x: &Matrix) -> Matrix {
        self.forward(params, x).output().clone()
    }

    /// Gradients for all parameters and for the input, given `d_out = ∂L/∂output`.
    pub fn backward(&self, params: &[Matrix], cache: &MlpCache, d_out: Matrix) -> (Vec<Matrix>, Matrix) {
        let mut grads = vec![Matrix::zeros(0, 0); self.n_params()];
        let mut delta = d_out;
        for l in (0..self.n_layers()).rev() {
            if l + 1 < self.n_layers() {
                for (d, z) in delta.data_mut().iter_mut().zip(cache.pre[l].data()) {
                    if *z <= 0.0 {
                        *d = 0.0;
                    }
                }
            }
            grads[2 * l] = cache.inputs[l].t_matmul(&delta);
            grads[2 * l + 1] = delta.col_sums();
            delta = delta.matmul_t(&params[2 * l]);
        }
        (grads, delta)
    }
}

#[inline]
fn relu(x: f64) -> f64 {
    x.max(0.0)
}
