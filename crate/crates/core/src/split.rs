//! Node and edge train/validation/test splits (64% / 16% / 20%).

use std::collections::HashSet;
use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use rand::seq::SliceRandom;
use rand::Rng as _;

use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::rng;

/// Sizes for a 64/16/20 split: floors for train and validation, remainder to test.
pub fn split_sizes(total: usize) -> (usize, usize, usize) {
    let train = total * 64 / 100;
    let val = total * 16 / 100;
    (train, val, total - train - val)
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct NodeSplit {
    pub train: Vec<usize>,
    pub val: Vec<usize>,
    pub test: Vec<usize>,
    pub seed: u64,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EdgeSplit {
    pub pos_train: Vec<(usize, usize)>,
    pub pos_val: Vec<(usize, usize)>,
    pub pos_test: Vec<(usize, usize)>,
    pub neg_train: Vec<(usize, usize)>,
    pub neg_val: Vec<(usize, usize)>,
    pub neg_test: Vec<(usize, usize)>,
    pub seed: u64,
}

pub fn generate_node_split(g: &Graph, seed: u64) -> Result<NodeSplit> {
    let n = g.n();
    if n < 5 {
        return Err(Error::invalid(format!("node split needs at least 5 nodes, got {n}")));
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(&mut rng::seeded(seed));
    let (train, val, _) = split_sizes(n);
    let test = order.split_off(train + val);
    let val = order.split_off(train);
    Ok(NodeSplit {
        train: order,
        val,
        test,
        seed,
    })
}

/// Edge split for link prediction with an equal number of sampled non-edges
/// per part.
pub fn generate_edge_split(g: &Graph, seed: u64) -> Result<EdgeSplit> {
    let m = g.m();
    if m < 5 {
        return Err(Error::invalid(format!("edge split needs at least 5 edges, got {m}")));
    }
    let available = g.max_edges() - m;
    if available < m {
        return Err(Error::invalid(format!(
            "graph has {available} non-edges but {m} negatives are required"
        )));
    }

    let mut rng = rng::seeded(seed);
    let mut pos = g.edges().to_vec();
    pos.shuffle(&mut rng);

    let key = |u: usize, v: usize| if g.directed() { (u, v) } else { (u.min(v), u.max(v)) };
    let existing: HashSet<(usize, usize)> = g.edges().iter().copied().collect();
    let n = g.n();

    let mut neg = Vec::with_capacity(m);
    if g.density() > 0.5 {
        let mut all = Vec::with_capacity(available);
        for u in 0..n {
            let start = if g.directed() { 0 } else { u + 1 };
            for v in start..n {
                if u != v && !existing.contains(&(u, v)) {
                    all.push((u, v));
                }
            }
        }
        all.shuffle(&mut rng);
        all.truncate(m);
        neg = all;
    } else {
        let mut taken = HashSet::with_capacity(m);
        while neg.len() < m {
            let u = rng.gen_range(0..n);
            let v = rng.gen_range(0..n);
            if u == v {
                continue;
            }
            let e = key(u, v);
            if !existing.contains(&e) && taken.insert(e) {
                neg.push(e);
            }
        }
    }

    let (train, val, _) = split_sizes(m);
    let pos_test = pos.split_off(train + val);
    let pos_val = pos.split_off(train);
    let neg_test = neg.split_off(train + val);
    let neg_val = neg.split_off(train);
    Ok(EdgeSplit {
        pos_train: pos,
        pos_val,
        pos_test,
        neg_train: neg,
        neg_val,
        neg_test,
        seed,
    })
}

impl NodeSplit {
    /// CSV with header `role,node`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("role,node\n");
        for (role, set) in [("train", &self.train), ("val", &self.val), ("test", &self.test)] {
            for v in set {
                let _ = writeln!(out, "{role},{v}");
            }
        }
        out
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        fs::write(path, self.to_csv()).map_err(|e| Error::io(path, e))
    }

    pub fn load(path: impl AsRef<Path>, seed: u64) -> Result<Self> {
        let path = path.as_ref();
        let mut split = NodeSplit {
            train: vec![],
            val: vec![],
            test: vec![],
            seed,
        };
        for (line, fields) in read_rows(path, "role,node")? {
            let [role, node] = fields.as_slice() else {
                return Err(bad_row(path, line));
            };
            let node = node.parse().map_err(|_| bad_row(path, line))?;
            match role.as_str() {
                "train" => split.train.push(node),
                "val" => split.val.push(node),
                "test" => split.test.push(node),
                _ => return Err(bad_row(path, line)),
            }
        }
        Ok(split)
    }
}

impl EdgeSplit {
    fn parts(&self) -> [(&'static str, &Vec<(usize, usize)>); 6] {
        [
            ("pos_train", &self.pos_train),
            ("pos_val", &self.pos_val),
            ("pos_test", &self.pos_test),
            ("neg_train", &self.neg_train),
            ("neg_val", &self.neg_val),
            ("neg_test", &self.neg_test),
        ]
    }

    /// CSV with header `role,u,v`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("role,u,v\n");
        for (role, set) in self.parts() {
            for (u, v) in set {
                let _ = writeln!(out, "{role},{u},{v}");
            }
        }
        out
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        fs::write(path, self.to_csv()).map_err(|e| Error::io(path, e))
    }

    pub fn load(path: impl AsRef<Path>, seed: u64) -> Result<Self> {
        let path = path.as_ref();
        let mut split = EdgeSplit {
            pos_train: vec![],
            pos_val: vec![],
            pos_test: vec![],
            neg_train: vec![],
            neg_val: vec![],
            neg_test: vec![],
            seed,
        };
        for (line, fields) in read_rows(path, "role,u,v")? {
            let [role, u, v] = fields.as_slice() else {
                return Err(bad_row(path, line));
            };
            let e = (
                u.parse().map_err(|_| bad_row(path, line))?,
                v.parse().map_err(|_| bad_row(path, line))?,
            );
            let target = match role.as_str() {
                "pos_train" => &mut split.pos_train,
                "pos_val" => &mut split.pos_val,
                "pos_test" => &mut split.pos_test,
                "neg_train" => &mut split.neg_train,
                "neg_val" => &mut split.neg_val,
                "neg_test" => &mut split.neg_test,
                _ => return Err(bad_row(path, line)),
            };
            target.push(e);
        }
        Ok(split)
    }
}

fn read_rows(path: &Path, header: &str) -> Result<Vec<(usize, Vec<String>)>> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let mut lines = text.lines().enumerate();
    match lines.next() {
        Some((_, h)) if h.trim() == header => {}
        _ => {
            return Err(Error::Parse {
                path: path.to_path_buf(),
                line: 1,
                message: format!("expected header `{header}`"),
            })
        }
    }
    Ok(lines
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(i, l)| (i + 1, l.trim().split(',').map(str::to_owned).collect()))
        .collect())
}

fn bad_row(path: &Path, line: usize) -> Error {
    Error::Parse {
        path: path.to_path_buf(),
        line,
        message: "malformed split row".into(),
    }
}
