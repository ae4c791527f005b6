//! Node-level structural extractors and graph-level statistics.

use std::collections::BTreeMap;

use crate::graph::{Adjacency, Graph};
use crate::metafeat::orbits::{EdgeOrbit, EdgeOrbitCounts};
use crate::metafeat::summary::quantile_sorted;

/// Core number of every node (Batagelj–Zaversnik bucket peeling).
pub fn kcore_numbers(adj: &Adjacency) -> Vec<usize> {
    let n = adj.n();
    if n == 0 {
        return vec![];
    }
    let mut deg: Vec<usize> = (0..n).map(|v| adj.degree(v)).collect();
    let max_deg = deg.iter().copied().max().unwrap_or(0);
    let mut bin = vec![0usize; max_deg + 1];
    for &d in &deg {
        bin[d] += 1;
    }
    let mut start = 0;
    for b in bin.iter_mut() {
        let count = *b;
        *b = start;
        start += count;
    }
    let mut pos = vec![0usize; n];
    let mut vert = vec![0usize; n];
    for v in 0..n {
        pos[v] = bin[deg[v]];
        vert[pos[v]] = v;
        bin[deg[v]] += 1;
    }
    for d in (1..=max_deg).rev() {
        bin[d] = bin[d - 1];
    }
    bin[0] = 0;
    for i in 0..n {
        let v = vert[i];
        for &u in adj.neighbors(v) {
            if deg[u] > deg[v] {
                let du = deg[u];
                let pu = pos[u];
                let pw = bin[du];
                let w = vert[pw];
                if u != w {
                    pos[u] = pw;
                    vert[pu] = w;
                    pos[w] = pu;
                    vert[pw] = u;
                }
                bin[du] += 1;
                deg[u] -= 1;
            }
        }
    }
    deg
}

#[derive(Clone, Debug)]
pub struct PageRank {
    pub scores: Vec<f64>,
    pub iterations: usize,
    pub converged: bool,
}

/// Power iteration with uniform teleport; dangling mass is spread uniformly.
/// Convergence is measured in L1 norm.
pub fn pagerank(adj: &Adjacency, damping: f64, tol: f64, max_iter: usize) -> PageRank {
    let n = adj.n();
    if n == 0 {
        return PageRank {
            scores: vec![],
            iterations: 0,
            converged: true,
        };
    }
    let nf = n as f64;
    let mut x = vec![1.0 / nf; n];
    let mut next = vec![0.0; n];
    for it in 1..=max_iter {
        let dangling: f64 = (0..n).filter(|&v| adj.degree(v) == 0).map(|v| x[v]).sum();
        let base = (1.0 - damping) / nf + damping * dangling / nf;
        next.iter_mut().for_each(|y| *y = base);
        for v in 0..n {
            let d = adj.degree(v);
            if d > 0 {
                let share = damping * x[v] / d as f64;
                for &u in adj.neighbors(v) {
                    next[u] += share;
                }
            }
        }
        let total: f64 = next.iter().sum();
        next.iter_mut().for_each(|y| *y /= total);
        let diff: f64 = x.iter().zip(&next).map(|(a, b)| (a - b).abs()).sum();
        std::mem::swap(&mut x, &mut next);
        if diff < tol {
            return PageRank {
                scores: x,
                iterations: it,
                converged: true,
            };
        }
    }
    log::warn!("pagerank did not converge in {max_iter} iterations");
    PageRank {
        scores: x,
        iterations: max_iter,
        converged: false,
    }
}

/// Triangle count for each edge of `adj.edges()` (size of the common neighborhood).
pub fn edge_triangles(adj: &Adjacency) -> Vec<usize> {
    adj.edges()
        .map(|(u, v)| sorted_intersection_len(adj.neighbors(u), adj.neighbors(v)))
        .collect()
}

fn sorted_intersection_len(a: &[usize], b: &[usize]) -> usize {
    let (mut i, mut j, mut c) = (0, 0, 0);
    while i < a.len() && j < b.len() {
        match a[i].cmp(&b[j]) {
            std::cmp::Ordering::Less => i += 1,
            std::cmp::Ordering::Greater => j += 1,
            std::cmp::Ordering::Equal => {
                c += 1;
                i += 1;
                j += 1;
            }
        }
    }
    c
}

/// Node-centered wedges `C(deg, 2)` and triangles per node.
pub fn wedge_triangle_counts(adj: &Adjacency) -> (Vec<f64>, Vec<f64>) {
    let n = adj.n();
    let wedges = (0..n)
        .map(|v| {
            let d = adj.degree(v) as f64;
            d * (d - 1.0) / 2.0
        })
        .collect();
    let mut tri = vec![0usize; n];
    for ((u, v), t) in adj.edges().zip(edge_triangles(adj)) {
        tri[u] += t;
        tri[v] += t;
    }
    // each triangle at v is seen from both of its edges incident to v
    (wedges, tri.into_iter().map(|t| (t / 2) as f64).collect())
}

/// Degree assortativity: Pearson correlation of endpoint degrees over both
/// orientations of every edge; 0 when the degrees have no variance.
pub fn degree_assortativity(adj: &Adjacency) -> f64 {
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    for (u, v) in adj.edges() {
        let (du, dv) = (adj.degree(u) as f64, adj.degree(v) as f64);
        xs.extend([du, dv]);
        ys.extend([dv, du]);
    }
    if xs.is_empty() {
        return 0.0;
    }
    let k = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / k;
    let my = ys.iter().sum::<f64>() / k;
    let cov: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let vx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let vy: f64 = ys.iter().map(|y| (y - my).powi(2)).sum();
    if vx == 0.0 || vy == 0.0 {
        0.0
    } else {
        cov / (vx * vy).sqrt()
    }
}

fn median(values: &[f64]) -> f64 {
    if values.is_empty() {
        return 0.0;
    }
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    quantile_sorted(&v, 0.5)
}

fn mean(values: &[f64]) -> f64 {
    if values.is_empty() {
        0.0
    } else {
        values.iter().sum::<f64>() / values.len() as f64
    }
}

/// Names of the 16 compact graph-level statistics, in output order.
pub const COMPACT_GLOBALS: [&str; 16] = [
    "n_nodes",
    "n_edges",
    "density",
    "max_degree",
    "mean_degree",
    "assortativity",
    "max_core",
    "mean_core",
    "median_core",
    "global_clustering",
    "triangles",
    "mean_triangles_per_edge",
    "median_triangles_per_edge",
    "cliques4",
    "mean_cliques4_per_edge",
    "median_cliques4_per_edge",
];

/// Graph-level statistics keyed by name. Contains the 16 compact statistics
/// plus `symmetrized_density`.
pub fn global_stats(g: &Graph, adj: &Adjacency, cores: &[usize], orbits: &EdgeOrbitCounts) -> BTreeMap<&'static str, f64> {
    let n = adj.n();
    let degrees: Vec<f64> = (0..n).map(|v| adj.degree(v) as f64).collect();
    let cores: Vec<f64> = cores.iter().map(|&c| c as f64).collect();
    let wedges: f64 = degrees.iter().map(|d| d * (d - 1.0) / 2.0).sum();
    let tri_edge: Vec<f64> = orbits.counts.iter().map(|c| c[EdgeOrbit::TriangleEdge as usize]).collect();
    let k4_edge: Vec<f64> = orbits.counts.iter().map(|c| c[EdgeOrbit::CliqueEdge as usize]).collect();
    let triangles = tri_edge.iter().sum::<f64>() / 3.0;
    let cliques4 = k4_edge.iter().sum::<f64>() / 6.0;

    let sym_density = if n < 2 {
        0.0
    } else {
        adj.m() as f64 / (n as f64 * (n as f64 - 1.0) / 2.0)
    };

    let mut s = BTreeMap::new();
    s.insert("n_nodes", g.n() as f64);
    s.insert("n_edges", g.m() as f64);
    s.insert("density", g.density());
    s.insert("symmetrized_density", sym_density);
    s.insert("max_degree", degrees.iter().copied().fold(0.0, f64::max));
    s.insert("mean_degree", mean(&degrees));
    s.insert("assortativity", degree_assortativity(adj));
    s.insert("max_core", cores.iter().copied().fold(0.0, f64::max));
    s.insert("mean_core", mean(&cores));
    s.insert("median_core", median(&cores));
    s.insert("global_clustering", if wedges > 0.0 { 3.0 * triangles / wedges } else { 0.0 });
    s.insert("triangles", triangles);
    s.insert("mean_triangles_per_edge", mean(&tri_edge));
    s.insert("median_triangles_per_edge", median(&tri_edge));
    s.insert("cliques4", cliques4);
    s.insert("mean_cliques4_per_edge", mean(&k4_edge));
    s.insert("median_cliques4_per_edge", median(&k4_edge));
    s
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metafeat::orbits::{edge_orbit_counts, OrbitMode};

    fn adj(n: usize, edges: &[(usize, usize)]) -> Adjacency {
        Graph::new(n, edges.iter().copied(), false).unwrap().adjacency()
    }

    const K4: [(usize, usize); 6] = [(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)];

    /// Repeatedly deletes nodes of degree < k; core(v) is the last k it survives.
    fn peeling_oracle(n: usize, edges: &[(usize, usize)]) -> Vec<usize> {
        let mut core = vec![0; n];
        for k in 1..n {
            let mut alive = vec![true; n];
            loop {
                let deg: Vec<usize> = (0..n)
                    .map(|v| {
                        edges
                            .iter()
                            .filter(|&&(a, b)| (a == v && alive[b]) || (b == v && alive[a]))
                            .count()
                    })
                    .collect();
                let drop: Vec<usize> = (0..n).filter(|&v| alive[v] && deg[v] < k).collect();
                if drop.is_empty() {
                    break;
                }
                drop.into_iter().for_each(|v| alive[v] = false);
            }
            for v in 0..n {
                if alive[v] {
                    core[v] = k;
                }
            }
        }
        core
    }

    #[test]
    fn kcore_examples() {
        assert_eq!(kcore_numbers(&adj(4, &K4)), vec![3, 3, 3, 3]);
        assert_eq!(kcore_numbers(&adj(4, &[(0, 1), (1, 2), (2, 3)])), vec![1, 1, 1, 1]);
        let paw = [(0, 1), (1, 2), (0, 2), (2, 3)];
        assert_eq!(kcore_numbers(&adj(4, &paw)), peeling_oracle(4, &paw));
        assert_eq!(kcore_numbers(&adj(4, &paw)), vec![2, 2, 2, 1]);
    }

    #[test]
    fn kcore_matches_peeling_on_random_graphs() {
        use rand::Rng;
        let mut r = crate::rng::seeded(17);
        for _ in 0..30 {
            let n = r.gen_range(2..12);
            let mut edges = vec![];
            for u in 0..n {
                for v in u + 1..n {
                    if r.gen_bool(0.35) {
                        edges.push((u, v));
                    }
                }
            }
            assert_eq!(kcore_numbers(&adj(n, &edges)), peeling_oracle(n, &edges));
        }
    }

    /// Dense power iteration on the Google matrix.
    fn dense_pagerank(n: usize, edges: &[(usize, usize)], d: f64) -> Vec<f64> {
        let mut a = vec![vec![0.0; n]; n];
        for &(u, v) in edges {
            a[u][v] = 1.0;
            a[v][u] = 1.0;
        }
        let mut google = vec![vec![0.0; n]; n];
        for (i, row) in a.iter().enumerate() {
            let deg: f64 = row.iter().sum();
            for j in 0..n {
                let walk = if deg > 0.0 { row[j] / deg } else { 1.0 / n as f64 };
                google[i][j] = d * walk + (1.0 - d) / n as f64;
            }
        }
        let mut x = vec![1.0 / n as f64; n];
        for _ in 0..2000 {
            let mut y = vec![0.0; n];
            for i in 0..n {
                for j in 0..n {
                    y[j] += x[i] * google[i][j];
                }
            }
            x = y;
        }
        x
    }

    #[test]
    fn pagerank_cycle_is_uniform() {
        let pr = pagerank(&adj(4, &[(0, 1), (1, 2), (2, 3), (3, 0)]), 0.85, 1e-8, 200);
        for s in pr.scores {
            assert!((s - 0.25).abs() < 1e-12);
        }
    }

    #[test]
    fn pagerank_star_matches_dense_oracle() {
        let star = [(0, 1), (0, 2), (0, 3), (0, 4)];
        let pr = pagerank(&adj(5, &star), 0.85, 1e-12, 1000);
        let oracle = dense_pagerank(5, &star, 0.85);
        for (a, b) in pr.scores.iter().zip(&oracle) {
            assert!((a - b).abs() < 1e-8, "{a} vs {b}");
        }
        assert!((pr.scores.iter().sum::<f64>() - 1.0).abs() < 1e-9);
    }

    #[test]
    fn pagerank_with_isolated_nodes() {
        let edges = [(0, 1), (1, 2)];
        let pr = pagerank(&adj(5, &edges), 0.85, 1e-12, 1000);
        let oracle = dense_pagerank(5, &edges, 0.85);
        for (a, b) in pr.scores.iter().zip(&oracle) {
            assert!((a - b).abs() < 1e-8);
        }
        assert!(pr.converged);
    }

    #[test]
    fn pagerank_flags_non_convergence() {
        let pr = pagerank(&adj(5, &[(0, 1), (0, 2), (0, 3), (0, 4)]), 0.85, 1e-15, 2);
        assert!(!pr.converged);
        assert_eq!(pr.iterations, 2);
    }

    #[test]
    fn wedges_and_triangles() {
        let (w, t) = wedge_triangle_counts(&adj(3, &[(0, 1), (1, 2), (0, 2)]));
        assert_eq!((w, t), (vec![1.0; 3], vec![1.0; 3]));
        let (w, t) = wedge_triangle_counts(&adj(4, &[(0, 1), (0, 2), (0, 3)]));
        assert_eq!(w, vec![3.0, 0.0, 0.0, 0.0]);
        assert_eq!(t, vec![0.0; 4]);
    }

    #[test]
    fn global_stats_k4_and_star() {
        let g = Graph::new(4, K4, false).unwrap();
        let a = g.adjacency();
        let s = global_stats(&g, &a, &kcore_numbers(&a), &edge_orbit_counts(&a, OrbitMode::Exact));
        assert_eq!(s["density"], 1.0);
        assert_eq!(s["global_clustering"], 1.0);
        assert_eq!(s["triangles"], 4.0);
        assert_eq!(s["cliques4"], 1.0);
        assert_eq!(s["assortativity"], 0.0);

        let g = Graph::new(5, [(0, 1), (0, 2), (0, 3), (0, 4)], false).unwrap();
        let a = g.adjacency();
        let s = global_stats(&g, &a, &kcore_numbers(&a), &edge_orbit_counts(&a, OrbitMode::Exact));
        assert_eq!(s["triangles"], 0.0);
        assert_eq!(s["global_clustering"], 0.0);
        assert_eq!(s["assortativity"], -1.0);
    }

    #[test]
    fn regular_graph_has_zero_assortativity() {
        assert_eq!(degree_assortativity(&adj(5, &[(0, 1), (1, 2), (2, 3), (3, 4), (4, 0)])), 0.0);
    }
}
