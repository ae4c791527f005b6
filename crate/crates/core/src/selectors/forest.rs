//! Multi-output regression trees and random forests (CART, squared error).

use rand::seq::index;
use rand::Rng as _;
use serde::{Deserialize, Serialize};

use crate::linalg::Matrix;
use crate::rng::{self, Rng};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum TreeNode {
    Split {
        feature: usize,
        threshold: f64,
        left: usize,
        right: usize,
    },
    Leaf {
        value: Vec<f64>,
    },
}

/// A regression tree stored as a preorder node list; node 0 is the root.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RegressionTree {
    pub nodes: Vec<TreeNode>,
}

#[derive(Clone, Copy, Debug)]
pub struct TreeParams {
    pub max_depth: usize,
    pub min_samples_split: usize,
    /// Features examined per split; `None` means all.
    pub max_features: Option<usize>,
}

impl RegressionTree {
    pub fn fit(x: &Matrix, y: &Matrix, rows: &[usize], params: &TreeParams, rng: &mut Rng) -> Self {
        let mut tree = RegressionTree { nodes: Vec::new() };
        let mut rows = rows.to_vec();
        tree.grow(x, y, &mut rows, 0, params, rng);
        tree
    }

    pub fn predict(&self, x: &[f64]) -> &[f64] {
        let mut at = 0;
        loop {
            match &self.nodes[at] {
                TreeNode::Leaf { value } => return value,
                TreeNode::Split {
                    feature,
                    threshold,
                    left,
                    right,
                } => at = if x[*feature] <= *threshold { *left } else { *right },
            }
        }
    }

    pub fn depth(&self) -> usize {
        fn walk(nodes: &[TreeNode], at: usize) -> usize {
            match &nodes[at] {
                TreeNode::Leaf { .. } => 0,
                TreeNode::Split { left, right, .. } => 1 + walk(nodes, *left).max(walk(nodes, *right)),
            }
        }
        walk(&self.nodes, 0)
    }

    fn grow(&mut self, x: &Matrix, y: &Matrix, rows: &mut [usize], depth: usize, params: &TreeParams, rng: &mut Rng) -> usize {
        let id = self.nodes.len();
        let mean = mean_target(y, rows);
        self.nodes.push(TreeNode::Leaf { value: mean });
        if depth >= params.max_depth || rows.len() < params.min_samples_split.max(2) {
            return id;
        }
        let Some((feature, threshold)) = best_split(x, y, rows, params, rng) else {
            return id;
        };
        // stable partition keeps the row order deterministic
        let (mut l, mut r): (Vec<usize>, Vec<usize>) = rows.iter().partition(|&&i| x.get(i, feature) <= threshold);
        let left = self.grow(x, y, &mut l, depth + 1, params, rng);
        let right = self.grow(x, y, &mut r, depth + 1, params, rng);
        self.nodes[id] = TreeNode::Split {
            feature,
            threshold,
            left,
            right,
        };
        id
    }
}

fn mean_target(y: &Matrix, rows: &[usize]) -> Vec<f64> {
    let mut m = vec![0.0; y.cols()];
    for &i in rows {
        for (a, b) in m.iter_mut().zip(y.row(i)) {
            *a += b;
        }
    }
    let n = rows.len().max(1) as f64;
    m.iter_mut().for_each(|v| *v /= n);
    m
}

fn sse(sum: &[f64], sum_sq: f64, count: f64) -> f64 {
    sum_sq - sum.iter().map(|s| s * s).sum::<f64>() / count
}

/// Best (feature, threshold) by total squared-error reduction, or `None`
/// when the node is pure or no feature separates its rows.
fn best_split(x: &Matrix, y: &Matrix, rows: &[usize], params: &TreeParams, rng: &mut Rng) -> Option<(usize, f64)> {
    let d = x.cols();
    let k = y.cols();
    let total_sum = {
        let mut s = vec![0.0; k];
        for &i in rows {
            for (a, b) in s.iter_mut().zip(y.row(i)) {
                *a += b;
            }
        }
        s
    };
    let total_sq: f64 = rows.iter().map(|&i| y.row(i).iter().map(|v| v * v).sum::<f64>()).sum();
    let parent = sse(&total_sum, total_sq, rows.len() as f64);
    if parent <= 1e-14 * total_sq.max(1e-300) {
        return None;
    }

    let features: Vec<usize> = match params.max_features {
        Some(f) if f < d => {
            let mut v = index::sample(rng, d, f.max(1)).into_vec();
            v.sort_unstable();
            v
        }
        _ => (0..d).collect(),
    };

    let mut best: Option<(f64, usize, f64)> = None;
    let mut order = rows.to_vec();
    for &f in &features {
        order.sort_by(|&a, &b| x.get(a, f).total_cmp(&x.get(b, f)).then(a.cmp(&b)));
        let mut left_sum = vec![0.0; k];
        let mut left_sq = 0.0;
        for split in 1..order.len() {
            let i = order[split - 1];
            for (a, b) in left_sum.iter_mut().zip(y.row(i)) {
                *a += b;
            }
            left_sq += y.row(i).iter().map(|v| v * v).sum::<f64>();
            let (lo, hi) = (x.get(i, f), x.get(order[split], f));
            if lo == hi {
                continue;
            }
            let nl = split as f64;
            let nr = (order.len() - split) as f64;
            let right_sum: Vec<f64> = total_sum.iter().zip(&left_sum).map(|(t, l)| t - l).collect();
            let cost = sse(&left_sum, left_sq, nl) + sse(&right_sum, total_sq - left_sq, nr);
            if best.is_none_or(|(c, _, _)| cost < c) {
                best = Some((cost, f, lo + (hi - lo) / 2.0));
            }
        }
    }
    best.filter(|&(c, _, _)| c < parent).map(|(_, f, t)| (f, t))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RandomForest {
    pub trees: Vec<RegressionTree>,
    pub n_outputs: usize,
}

#[derive(Clone, Copy, Debug)]
pub struct ForestParams {
    pub n_trees: usize,
    pub max_depth: usize,
    pub bootstrap: bool,
}

impl RandomForest {
    /// Bootstrap-aggregated trees, each split examining `⌊√d⌋` random features.
    pub fn fit(x: &Matrix, y: &Matrix, params: &ForestParams, seed: u64) -> Self {
        let n = x.rows();
        let max_features = ((x.cols() as f64).sqrt().floor() as usize).max(1);
        let tree_params = TreeParams {
            max_depth: params.max_depth,
            min_samples_split: 2,
            max_features: Some(max_features),
        };
        let trees = (0..params.n_trees)
            .map(|t| {
                let mut r = rng::seeded(rng::derive(seed, t as u64));
                let rows: Vec<usize> = if params.bootstrap {
                    (0..n).map(|_| r.gen_range(0..n)).collect()
                } else {
                    (0..n).collect()
                };
                RegressionTree::fit(x, y, &rows, &tree_params, &mut r)
            })
            .collect();
        RandomForest {
            trees,
            n_outputs: y.cols(),
        }
    }

    pub fn predict(&self, x: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.n_outputs];
        for t in &self.trees {
            for (o, v) in out.iter_mut().zip(t.predict(x)) {
                *o += v;
            }
        }
        let k = self.trees.len().max(1) as f64;
        out.iter_mut().for_each(|v| *v /= k);
        out
    }
}
