//! Full-batch gradient training of differentiable objectives.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::Matrix;

/// A scalar loss over a list of parameter matrices.
pub trait Objective {
    /// Loss and its gradient with respect to every parameter matrix.
    fn loss_grad(&self, params: &[Matrix]) -> (f64, Vec<Matrix>);

    fn loss(&self, params: &[Matrix]) -> f64 {
        self.loss_grad(params).0
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OptimizerKind {
    /// Gradient descent with heavy-ball momentum.
    Sgd,
    Adam,
}

#[derive(Clone, Copy, Debug)]
pub struct TrainOptions {
    pub epochs: usize,
    pub learning_rate: f64,
    pub momentum: f64,
    pub weight_decay: f64,
    pub optimizer: OptimizerKind,
    /// Stop after this many epochs without relative improvement of `min_improvement`.
    pub patience: usize,
    pub min_improvement: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct TrainStats {
    pub epochs_run: usize,
    pub losses: Vec<f64>,
}

impl TrainStats {
    pub fn final_loss(&self) -> f64 {
        self.losses.last().copied().unwrap_or(f64::NAN)
    }
}

const ADAM_BETA1: f64 = 0.9;
const ADAM_BETA2: f64 = 0.999;
const ADAM_EPS: f64 = 1e-8;

pub fn train(objective: &impl Objective, params: &mut [Matrix], opts: &TrainOptions) -> Result<TrainStats> {
    let mut first: Vec<Matrix> = params.iter().map(|p| Matrix::zeros(p.rows(), p.cols())).collect();
    let mut second = first.clone();
    let mut losses = Vec::with_capacity(opts.epochs);
    let mut best = f64::INFINITY;
    let mut since_best = 0;

    for epoch in 0..opts.epochs {
        let (loss, grads) = objective.loss_grad(params);
        if !loss.is_finite() {
            return Err(Error::Diverged { epoch, loss });
        }
        losses.push(loss);
        if !best.is_finite() || loss < best - opts.min_improvement * best.abs().max(1e-12) {
            best = loss;
            since_best = 0;
        } else {
            since_best += 1;
            if since_best >= opts.patience {
                break;
            }
        }

        let t = (epoch + 1) as i32;
        for (((p, g), m1), m2) in params.iter_mut().zip(&grads).zip(&mut first).zip(&mut second) {
            let p = p.data_mut();
            let g = g.data();
            let m1 = m1.data_mut();
            let m2 = m2.data_mut();
            for k in 0..p.len() {
                let grad = g[k] + opts.weight_decay * p[k];
                match opts.optimizer {
                    OptimizerKind::Sgd => {
                        m1[k] = opts.momentum * m1[k] + grad;
                        p[k] -= opts.learning_rate * m1[k];
                    }
                    OptimizerKind::Adam => {
                        m1[k] = ADAM_BETA1 * m1[k] + (1.0 - ADAM_BETA1) * grad;
                        m2[k] = ADAM_BETA2 * m2[k] + (1.0 - ADAM_BETA2) * grad * grad;
                        let mh = m1[k] / (1.0 - ADAM_BETA1.powi(t));
                        let vh = m2[k] / (1.0 - ADAM_BETA2.powi(t));
                        p[k] -= opts.learning_rate * mh / (vh.sqrt() + ADAM_EPS);
                    }
                }
            }
        }
        if params.iter().any(|p| !p.is_finite()) {
            return Err(Error::Diverged {
                epoch,
                loss: f64::NAN,
            });
        }
    }
    let epochs_run = losses.len();
    Ok(TrainStats { epochs_run, losses })
}

/// Softmax of a slice (max-shifted).
pub fn softmax(xs: &[f64]) -> Vec<f64> {
    let max = xs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let exp: Vec<f64> = xs.iter().map(|x| (x - max).exp()).collect();
    let total: f64 = exp.iter().sum();
    exp.into_iter().map(|e| e / total).collect()
}

/// Top-1 (ListNet) cross-entropy between the softmax of `target` and the
/// softmax of `scores`, and its gradient with respect to `scores`.
pub fn listnet_loss(scores: &[f64], target: &[f64]) -> (f64, Vec<f64>) {
    let p = softmax(scores);
    let t = softmax(target);
    let max = scores.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let log_z = max + scores.iter().map(|s| (s - max).exp()).sum::<f64>().ln();
    let loss = -t.iter().zip(scores).map(|(ti, s)| ti * (s - log_z)).sum::<f64>();
    let grad = p.iter().zip(&t).map(|(pi, ti)| pi - ti).collect();
    (loss, grad)
}

/// Mean squared error over the cells where `mask` is set, and its gradient
/// with respect to `pred` (zero on unmasked cells).
pub fn masked_mse(pred: &Matrix, target: &Matrix, mask: &[bool]) -> (f64, Matrix) {
    let count = mask.iter().filter(|&&m| m).count().max(1) as f64;
    let mut grad = Matrix::zeros(pred.rows(), pred.cols());
    let mut loss = 0.0;
    for (((g, p), t), &m) in grad.data_mut().iter_mut().zip(pred.data()).zip(target.data()).zip(mask) {
        if m {
            let r = p - t;
            loss += r * r;
            *g = 2.0 * r / count;
        }
    }
    (loss / count, grad)
}


#[cfg(test)]
mod tests {
    use super::*;

    struct Quadratic;

    impl Objective for Quadratic {
        fn loss_grad(&self, params: &[Matrix]) -> (f64, Vec<Matrix>) {
            let p = &params[0];
            let loss = p.data().iter().map(|x| (x - 3.0).powi(2)).sum();
            (loss, vec![p.map(|x| 2.0 * (x - 3.0))])
        }
    }

    fn opts(optimizer: OptimizerKind, lr: f64) -> TrainOptions {
        TrainOptions {
            epochs: 2000,
            learning_rate: lr,
            momentum: 0.9,
            weight_decay: 0.0,
            optimizer,
            patience: 2000,
            min_improvement: 1e-9,
        }
    }

    #[test]
    fn sgd_and_adam_minimize_quadratic() {
        for (kind, lr) in [(OptimizerKind::Sgd, 0.01), (OptimizerKind::Adam, 0.05)] {
            let mut params = vec![Matrix::zeros(2, 2)];
            train(&Quadratic, &mut params, &opts(kind, lr)).unwrap();
            for x in params[0].data() {
                assert!((x - 3.0).abs() < 1e-3, "{kind:?}: {x}");
            }
        }
    }

    #[test]
    fn divergence_is_reported() {
        let mut params = vec![Matrix::filled(1, 1, 1.0)];
        let err = train(&Quadratic, &mut params, &opts(OptimizerKind::Sgd, 10.0)).unwrap_err();
        assert!(matches!(err, Error::Diverged { .. }));
    }

    #[test]
    fn plateau_stops_early() {
        struct Flat;
        impl Objective for Flat {
            fn loss_grad(&self, params: &[Matrix]) -> (f64, Vec<Matrix>) {
                (1.0, vec![Matrix::zeros(params[0].rows(), params[0].cols())])
            }
        }
        let mut params = vec![Matrix::zeros(1, 1)];
        let o = TrainOptions {
            patience: 10,
            ..opts(OptimizerKind::Sgd, 0.1)
        };
        assert_eq!(train(&Flat, &mut params, &o).unwrap().epochs_run, 11);
    }

    #[test]
    fn steady_progress_uses_the_whole_budget() {
        let mut params = vec![Matrix::zeros(1, 1)];
        let o = TrainOptions {
            epochs: 300,
            patience: 5,
            ..opts(OptimizerKind::Sgd, 1e-4)
        };
        assert_eq!(train(&Quadratic, &mut params, &o).unwrap().epochs_run, 300);
    }

    #[test]
    fn listnet_gradient_matches_finite_differences() {
        let scores = [0.3, -1.2, 2.0, 0.5];
        let target = [0.9, 0.1, 0.4, 0.7];
        let (_, g) = listnet_loss(&scores, &target);
        for k in 0..4 {
            let mut up = scores;
            up[k] += 1e-6;
            let mut down = scores;
            down[k] -= 1e-6;
            let numeric = (listnet_loss(&up, &target).0 - listnet_loss(&down, &target).0) / 2e-6;
            assert!((numeric - g[k]).abs() < 1e-8);
        }
        assert!((softmax(&scores).iter().sum::<f64>() - 1.0).abs() < 1e-12);
    }
}
