mod common;

use instasel::metafeat::orbits::{edge_orbit_counts, four_node_graphlet_frequencies, OrbitMode};
use instasel::metafeat::structure::wedge_triangle_counts;
use instasel::metafeat::summary::{summarize, summary_names};
use instasel::metafeat::{extract, ExtractOptions};
use instasel::synth::{erdos_renyi, permute_nodes};
use instasel::{meta_features, Graph, Schema};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};

fn check_against_enumeration(g: &Graph) {
    let adj = g.adjacency();
    let got = edge_orbit_counts(&adj, OrbitMode::Exact);
    let want = common::enumerate(g);
    assert_eq!(got.edges.len(), want.orbits.len());
    for (edge, counts) in got.edges.iter().zip(&got.counts) {
        assert_eq!(counts, &want.orbits[edge], "edge {edge:?}");
    }
    let total: f64 = want.graphlets4.iter().sum();
    let freqs = four_node_graphlet_frequencies(&got);
    for (f, c) in freqs.iter().zip(want.graphlets4) {
        let expect = if total > 0.0 { c / total } else { 0.0 };
        assert_eq!(*f, expect);
    }
    assert_eq!(got.four_node_counts(), want.graphlets4);
    let (wedges, triangles) = wedge_triangle_counts(&adj);
    assert_eq!(wedges, want.node_wedges);
    assert_eq!(triangles, want.node_triangles);
}

#[test]
fn orbits_match_enumeration_on_small_random_graphs() {
    for seed in 0..30 {
        let n = 4 + (seed as usize % 9);
        let p = [0.2, 0.3, 0.5][seed as usize % 3];
        check_against_enumeration(&erdos_renyi(n, p, seed));
    }
}

#[test]
fn orbits_on_named_graphs() {
    // K4 minus an edge is a diamond: one chord and four rim edges
    let diamond = Graph::new(4, [(0, 1), (0, 2), (0, 3), (1, 2), (1, 3)], false).unwrap();
    check_against_enumeration(&diamond);
    let counts = edge_orbit_counts(&diamond.adjacency(), OrbitMode::Exact);
    let chord = counts.edges.iter().position(|&e| e == (0, 1)).unwrap();
    assert_eq!(counts.counts[chord][common::DIAMOND_CHORD], 1.0);
    for graph in [
        Graph::new(5, [(0, 1), (1, 2), (2, 3), (3, 4), (4, 0)], false).unwrap(),
        Graph::new(6, [(0, 1), (0, 2), (0, 3), (0, 4), (0, 5)], false).unwrap(),
        Graph::new(3, [], false).unwrap(),
    ] {
        check_against_enumeration(&graph);
    }
}

#[test]
fn sampled_orbits_equal_exact_below_the_cap() {
    let g = erdos_renyi(12, 0.4, 3);
    let adj = g.adjacency();
    let exact = edge_orbit_counts(&adj, OrbitMode::Exact);
    let sampled = edge_orbit_counts(&adj, OrbitMode::Sampled { cap: 100, seed: 1 });
    assert_eq!(exact, sampled);
}

#[test]
fn summaries_match_reference_on_random_vectors() {
    let mut r = rand::rngs::StdRng::seed_from_u64(11);
    for trial in 0..200 {
        let len = r.gen_range(1..120);
        let values: Vec<f64> = match trial % 4 {
            0 => (0..len).map(|_| r.gen_range(-5.0..5.0)).collect(),
            1 => (0..len).map(|_| r.gen_range(0..6) as f64).collect(),
            2 => (0..len).map(|_| r.gen::<f64>().powi(3) * 100.0).collect(),
            _ => (0..len).map(|_| r.gen_range(1.0..2.0)).collect(),
        };
        let got = summarize(&values).values;
        let want = common::reference_summary(&values);
        for (k, (a, b)) in got.iter().zip(&want).enumerate() {
            assert!(common::close(*a, *b, 1e-9), "trial {trial}, function {k}: {a} vs {b}");
        }
    }
}

#[test]
fn schema_dimensions_and_names() {
    let g = erdos_renyi(15, 0.3, 2);
    for schema in Schema::ALL {
        let v = meta_features(&g, schema);
        assert_eq!(v.values.len(), schema.dim());
        assert_eq!(schema.feature_names().len(), schema.dim());
        assert!(v.values.iter().all(|x| x.is_finite()));
    }
    let reg = meta_features(&g, Schema::Regular).values;
    let gl = meta_features(&g, Schema::Graphlets).values;
    let both = meta_features(&g, Schema::RegPlusGraphlets).values;
    assert_eq!(both, [reg, gl].concat());
}

#[test]
fn degenerate_graphs_stay_finite() {
    for g in [
        Graph::new(1, [], false).unwrap(),
        Graph::new(5, [], false).unwrap(),
        Graph::new(2, [(0, 1)], false).unwrap(),
        Graph::new(4, [(0, 1), (1, 2)], true).unwrap(),
    ] {
        for schema in Schema::ALL {
            let (v, _) = extract(&g, schema, &ExtractOptions::default());
            assert!(v.values.iter().all(|x| x.is_finite()), "{schema} on {} nodes", g.n());
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn relabeling_nodes_keeps_features(n in 3usize..25, p in 0.05f64..0.6, seed in 0u64..1000, perm in 0u64..1000) {
        let g = erdos_renyi(n, p, seed);
        let h = permute_nodes(&g, perm);
        for schema in [Schema::RegPlusGraphlets, Schema::Compact] {
            let a = meta_features(&g, schema).values;
            let b = meta_features(&h, schema).values;
            for (x, y) in a.iter().zip(&b) {
                prop_assert!(common::close(*x, *y, 1e-9), "{} vs {}", x, y);
            }
        }
    }

    #[test]
    fn summary_is_order_free(mut values in prop::collection::vec(-1e3f64..1e3, 1..60), seed in 0u64..100) {
        use rand::seq::SliceRandom;
        let before = summarize(&values).values;
        values.shuffle(&mut rand::rngs::StdRng::seed_from_u64(seed));
        prop_assert_eq!(before, summarize(&values).values);
    }
}

#[test]
fn outlier_counts_ignore_rounding_at_the_band_edge() {
    // two isolated nodes and one edge: mean + σ sits exactly on the larger PageRank
    let g = erdos_renyi(4, 0.13989844560089265, 183);
    let h = permute_nodes(&g, 25);
    let (a, b) = (meta_features(&g, Schema::Regular).values, meta_features(&h, Schema::Regular).values);
    assert!(a.iter().zip(&b).all(|(x, y)| common::close(*x, *y, 1e-9)));
    let names = summary_names();
    let exact = summarize(&[1.0, 1.0, 3.0, 3.0]).values;
    let bumped = summarize(&[1.0, 1.0, 3.0, 3.0 + 1e-12]).values;
    for (k, name) in names.iter().enumerate().filter(|(_, n)| n.starts_with("std_outlier")) {
        assert_eq!(exact[k], 0.0, "{name}");
        assert_eq!(bumped[k], 0.0, "{name}");
    }
}
