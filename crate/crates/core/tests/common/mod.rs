//! Reference implementations used as oracles by the integration tests and the
//! acceptance runner. Written for clarity, not speed, and sharing no code with
//! the library beyond its public data types.

#![allow(dead_code)]

use std::collections::BTreeMap;

use instasel::selectors::train::Objective;
use instasel::{Graph, Matrix};

// ---------------------------------------------------------------- graphlets

/// Orbit indices, in library output order.
pub const P3_EDGE: usize = 0;
pub const TRIANGLE_EDGE: usize = 1;
pub const P4_END: usize = 2;
pub const P4_MID: usize = 3;
pub const STAR_EDGE: usize = 4;
pub const C4_EDGE: usize = 5;
pub const TAILED_TAIL: usize = 6;
pub const TAILED_BASE: usize = 7;
pub const TAILED_APEX: usize = 8;
pub const DIAMOND_CHORD: usize = 9;
pub const DIAMOND_RIM: usize = 10;
pub const K4_EDGE: usize = 11;

/// Exhaustive induced-subgraph enumeration: counts per edge `(u, v)`, `u < v`.
pub struct Enumerated {
    pub orbits: BTreeMap<(usize, usize), [f64; 12]>,
    /// Induced 4-node graphlet counts: path, star, cycle, tailed triangle, diamond, clique.
    pub graphlets4: [f64; 6],
    pub triangles: f64,
    pub cliques4: f64,
    /// Per node: number of 2-paths centered there, and triangles through it.
    pub node_wedges: Vec<f64>,
    pub node_triangles: Vec<f64>,
}

pub fn dense_adjacency(g: &Graph) -> Vec<Vec<bool>> {
    let mut a = vec![vec![false; g.n()]; g.n()];
    for &(u, v) in g.edges() {
        if u != v {
            a[u][v] = true;
            a[v][u] = true;
        }
    }
    a
}

pub fn enumerate(g: &Graph) -> Enumerated {
    let a = dense_adjacency(g);
    let n = g.n();
    let mut orbits = BTreeMap::new();
    for u in 0..n {
        for v in u + 1..n {
            if a[u][v] {
                orbits.insert((u, v), [0.0; 12]);
            }
        }
    }
    let bump = |x: usize, y: usize, o: usize, orbits: &mut BTreeMap<(usize, usize), [f64; 12]>| {
        orbits.get_mut(&(x.min(y), x.max(y))).expect("edge")[o] += 1.0;
    };

    let mut triangles = 0.0;
    let mut node_triangles = vec![0.0; n];
    for i in 0..n {
        for j in i + 1..n {
            for k in j + 1..n {
                let nodes = [i, j, k];
                let edges: Vec<(usize, usize)> = pairs(&nodes).into_iter().filter(|&(x, y)| a[x][y]).collect();
                match edges.len() {
                    2 => edges.iter().for_each(|&(x, y)| bump(x, y, P3_EDGE, &mut orbits)),
                    3 => {
                        triangles += 1.0;
                        nodes.iter().for_each(|&x| node_triangles[x] += 1.0);
                        edges.iter().for_each(|&(x, y)| bump(x, y, TRIANGLE_EDGE, &mut orbits));
                    }
                    _ => {}
                }
            }
        }
    }

    let mut graphlets4 = [0.0; 6];
    for i in 0..n {
        for j in i + 1..n {
            for k in j + 1..n {
                for l in k + 1..n {
                    let nodes = [i, j, k, l];
                    let edges: Vec<(usize, usize)> = pairs(&nodes).into_iter().filter(|&(x, y)| a[x][y]).collect();
                    let deg = |x: usize| edges.iter().filter(|&&(p, q)| p == x || q == x).count();
                    if !connected(&nodes, &edges) {
                        continue;
                    }
                    let mut degs: Vec<usize> = nodes.iter().map(|&x| deg(x)).collect();
                    degs.sort_unstable();
                    match (edges.len(), degs.as_slice()) {
                        (3, [1, 1, 2, 2]) => {
                            graphlets4[0] += 1.0;
                            for &(x, y) in &edges {
                                let o = if deg(x) == 1 || deg(y) == 1 { P4_END } else { P4_MID };
                                bump(x, y, o, &mut orbits);
                            }
                        }
                        (3, [1, 1, 1, 3]) => {
                            graphlets4[1] += 1.0;
                            edges.iter().for_each(|&(x, y)| bump(x, y, STAR_EDGE, &mut orbits));
                        }
                        (4, [2, 2, 2, 2]) => {
                            graphlets4[2] += 1.0;
                            edges.iter().for_each(|&(x, y)| bump(x, y, C4_EDGE, &mut orbits));
                        }
                        (4, [1, 2, 2, 3]) => {
                            graphlets4[3] += 1.0;
                            for &(x, y) in &edges {
                                let o = if deg(x) == 1 || deg(y) == 1 {
                                    TAILED_TAIL
                                } else if deg(x) == 3 || deg(y) == 3 {
                                    TAILED_APEX
                                } else {
                                    TAILED_BASE
                                };
                                bump(x, y, o, &mut orbits);
                            }
                        }
                        (5, _) => {
                            graphlets4[4] += 1.0;
                            for &(x, y) in &edges {
                                let o = if deg(x) == 3 && deg(y) == 3 { DIAMOND_CHORD } else { DIAMOND_RIM };
                                bump(x, y, o, &mut orbits);
                            }
                        }
                        (6, _) => {
                            graphlets4[5] += 1.0;
                            edges.iter().for_each(|&(x, y)| bump(x, y, K4_EDGE, &mut orbits));
                        }
                        other => panic!("unclassified connected 4-node graphlet {other:?}"),
                    }
                }
            }
        }
    }

    let node_wedges = (0..n)
        .map(|v| {
            let nb: Vec<usize> = (0..n).filter(|&w| a[v][w]).collect();
            pairs(&nb).len() as f64
        })
        .collect();
    Enumerated {
        orbits,
        graphlets4,
        triangles,
        cliques4: graphlets4[5],
        node_wedges,
        node_triangles,
    }
}

fn pairs(nodes: &[usize]) -> Vec<(usize, usize)> {
    let mut out = Vec::new();
    for (i, &x) in nodes.iter().enumerate() {
        for &y in &nodes[i + 1..] {
            out.push((x, y));
        }
    }
    out
}

fn connected(nodes: &[usize], edges: &[(usize, usize)]) -> bool {
    let mut seen = vec![nodes[0]];
    let mut grew = true;
    while grew {
        grew = false;
        for &(x, y) in edges {
            let (hx, hy) = (seen.contains(&x), seen.contains(&y));
            if hx != hy {
                seen.push(if hx { y } else { x });
                grew = true;
            }
        }
    }
    seen.len() == nodes.len()
}

// ---------------------------------------------------------------- summaries

fn percentile(sorted: &[f64], q: f64) -> f64 {
    // numpy's default: position q·(n−1), linear between neighbours
    let pos = q * (sorted.len() - 1) as f64;
    let below = pos.floor() as usize;
    let above = pos.ceil() as usize;
    sorted[below] + (sorted[above] - sorted[below]) * (pos - below as f64)
}

fn safe_div(a: f64, b: f64) -> f64 {
    if b == 0.0 {
        0.0
    } else {
        a / b
    }
}

/// The 63 summaries by their textbook definitions, in library order.
pub fn reference_summary(values: &[f64]) -> Vec<f64> {
    if values.is_empty() {
        return vec![0.0; 63];
    }
    let n = values.len() as f64;
    let mut sorted = values.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let min = sorted[0];
    let max = *sorted.last().unwrap();
    let median = percentile(&sorted, 0.5);
    let mean = values.iter().sum::<f64>() / n;
    let all_equal = values.iter().all(|&v| v == values[0]);
    let moment = |p: i32| {
        if all_equal {
            0.0
        } else {
            values.iter().map(|v| (v - mean).powi(p)).sum::<f64>() / n
        }
    };
    let (m2, m3, m4) = (moment(2), moment(3), moment(4));
    let sd = m2.sqrt();

    let offset = if min > 0.0 { 0.0 } else { 1.0 - min };
    let log_mean = values.iter().map(|v| (v + offset).ln()).sum::<f64>() / n;
    let gmean = log_mean.exp() - offset;
    let hmean = n / values.iter().map(|v| 1.0 / (v + offset)).sum::<f64>() - offset;

    let skew = if m2 > 0.0 { m3 / (m2 * m2.sqrt()) } else { 0.0 };
    let excess = if m2 > 0.0 { m4 / (m2 * m2) - 3.0 } else { 0.0 };
    let excess_adj = if m2 > 0.0 && values.len() > 3 {
        (n - 1.0) / ((n - 2.0) * (n - 3.0)) * ((n + 1.0) * excess + 6.0)
    } else {
        excess
    };
    let (pearson, pearson_adj) = if m2 > 0.0 { (excess + 3.0, excess_adj + 3.0) } else { (0.0, 0.0) };

    let q1 = percentile(&sorted, 0.25);
    let q3 = percentile(&sorted, 0.75);
    let iqr = q3 - q1;
    let mut dev: Vec<f64> = values.iter().map(|v| (v - median).abs()).collect();
    dev.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let mad = percentile(&dev, 0.5);
    let aad = values.iter().map(|v| (v - mean).abs()).sum::<f64>() / n;

    // entropy of the distribution proportional to the values (shifted to ≥ 0)
    let base = min.min(0.0);
    let mass: f64 = values.iter().map(|v| v - base).sum();
    let entropy = if mass == 0.0 {
        0.0
    } else {
        values
            .iter()
            .map(|v| (v - base) / mass)
            .filter(|&p| p > 0.0)
            .map(|p| -p * p.log2())
            .sum()
    };
    let norm_entropy = if values.len() == 1 { 1.0 } else { entropy / n.log2() };

    // Gini via mean absolute difference
    let total: f64 = values.iter().sum();
    let mut abs_diff = 0.0;
    for x in values {
        for y in values {
            abs_diff += (x - y).abs();
        }
    }
    let gini = safe_div(abs_diff / 2.0, n * total);

    let mut out = vec![
        min,
        max,
        median,
        gmean,
        hmean,
        mean,
        sd,
        m2,
        skew,
        pearson,
        pearson_adj,
        excess,
        excess_adj,
        safe_div(q3 - q1, q3 + q1),
        mad,
        aad,
        safe_div(sd, mean),
        safe_div(m2, mean * mean),
        safe_div(m2, mean),
        safe_div(mean * mean, m2),
        entropy,
        norm_entropy,
        gini,
        q1,
        q3,
        iqr,
    ];
    let fences: Vec<(f64, f64)> = [1.5, 3.0].iter().map(|a| (q1 - a * iqr, q3 + a * iqr)).collect();
    out.extend(fences.iter().map(|f| f.0));
    out.extend(fences.iter().map(|f| f.1));
    let bands: Vec<(f64, f64)> = [1.0, 2.0, 3.0].iter().map(|a| (mean - a * sd, mean + a * sd)).collect();
    // a value must clear its bound by more than 1e-9 of the largest magnitude
    let slack = 1e-9 * min.abs().max(max.abs());
    for bounds in [&fences, &bands] {
        for frac in [false, true] {
            for &(lb, ub) in bounds.iter() {
                let low = values.iter().filter(|&&v| v < lb - slack).count() as f64;
                let high = values.iter().filter(|&&v| v > ub + slack).count() as f64;
                let d = if frac { n } else { 1.0 };
                out.extend([low / d, high / d, (low + high) / d]);
            }
        }
    }

    // mode on values rounded to 8 significant digits, smallest wins ties
    let mut counts: BTreeMap<String, (f64, usize)> = BTreeMap::new();
    for &v in values {
        let r: f64 = if v == 0.0 { 0.0 } else { format!("{v:.7e}").parse().unwrap() };
        let key = format!("{r:e}");
        counts.entry(key).or_insert((r, 0)).1 += 1;
    }
    let (mode, count) = counts
        .values()
        .copied()
        .fold((f64::INFINITY, 0), |(bv, bc), (v, c)| if c > bc || (c == bc && v < bv) { (v, c) } else { (bv, bc) });
    out.extend([mode, count as f64, count as f64 / n]);
    assert_eq!(out.len(), 63);
    out.into_iter().map(|v| if v.is_finite() { v } else { 0.0 }).collect()
}

/// `|a − b| ≤ tol · max(1, |a|, |b|)`.
pub fn close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * 1f64.max(a.abs()).max(b.abs())
}

// ---------------------------------------------------------------- metrics

/// AUC via the rank-sum (Mann-Whitney) form with average ranks.
pub fn reference_auc(scores: &[f64], best: usize) -> f64 {
    let m = scores.len();
    if m < 2 {
        return 1.0;
    }
    let below = scores.iter().filter(|&&s| s < scores[best]).count() as f64;
    let equal = scores.iter().filter(|&&s| s == scores[best]).count() as f64;
    // ascending average rank of the positive, 1-based
    let rank = below + (equal + 1.0) / 2.0;
    (rank - 1.0) / (m - 1) as f64
}

/// 1 / (average descending position of the tie block holding `best`).
pub fn reference_mrr(scores: &[f64], best: usize) -> f64 {
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| scores[b].partial_cmp(&scores[a]).unwrap());
    let positions: Vec<f64> = order
        .iter()
        .enumerate()
        .filter(|(_, &j)| scores[j] == scores[best])
        .map(|(p, _)| (p + 1) as f64)
        .collect();
    let avg = positions.iter().sum::<f64>() / positions.len() as f64;
    1.0 / avg
}

/// DCG@1 / IDCG@1 with relevance = performance − min performance, the top
/// model being the highest score (lowest index on ties).
pub fn reference_ndcg1(scores: &[f64], perfs: &[f64]) -> f64 {
    let mut top = 0;
    for j in 1..scores.len() {
        if scores[j] > scores[top] {
            top = j;
        }
    }
    let lo = perfs.iter().cloned().fold(f64::INFINITY, f64::min);
    let rel: Vec<f64> = perfs.iter().map(|p| p - lo).collect();
    let ideal = rel.iter().cloned().fold(0.0, f64::max);
    if ideal == 0.0 {
        return 1.0;
    }
    (rel[top] / 2f64.log2()) / (ideal / 2f64.log2())
}

// ---------------------------------------------------------------- gradients

/// Largest relative error between the analytic gradient and central
/// differences with step `h`, over entries where either exceeds `floor`.
pub fn finite_difference_error(obj: &impl Objective, params: &[Matrix], h: f64, floor: f64) -> f64 {
    let (_, analytic) = obj.loss_grad(params);
    let mut p = params.to_vec();
    let mut worst: f64 = 0.0;
    for t in 0..p.len() {
        for k in 0..p[t].data().len() {
            let x = p[t].data()[k];
            p[t].data_mut()[k] = x + h;
            let f_plus = obj.loss(&p);
            p[t].data_mut()[k] = x - h;
            let f_minus = obj.loss(&p);
            p[t].data_mut()[k] = x;
            let numeric = (f_plus - f_minus) / (2.0 * h);
            let a = analytic[t].data()[k];
            let scale = a.abs().max(numeric.abs());
            if scale > floor {
                worst = worst.max((a - numeric).abs() / scale);
            }
        }
    }
    worst
}
