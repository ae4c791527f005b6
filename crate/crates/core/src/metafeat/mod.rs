//! Structural meta-features.
//!
//! Extraction runs in two steps: structural extractors map a graph to
//! distributions over its nodes or edges, then each distribution is reduced
//! by the 63 summary functions in [`summary`]. Four schemas are offered:
//!
//! | schema               | layout                                               | dim  |
//! |----------------------|------------------------------------------------------|------|
//! | `regular`            | 5 node distributions × 63 + 3 globals                | 318  |
//! | `graphlets`          | 12 edge-orbit distributions × 63                     | 756  |
//! | `compact`            | 16 globals + 12 orbits × {mean, median, max} + 6     | 58   |
//! | `reg_plus_graphlets` | `regular` followed by `graphlets`                    | 1074 |
//!
//! Directed graphs are symmetrized first; only the `density` global looks at
//! the directed form.

pub mod orbits;
pub mod structure;
pub mod summary;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::Error;
use crate::graph::Graph;
use orbits::{edge_orbit_counts, four_node_graphlet_frequencies, EdgeOrbit, OrbitMode, N_ORBITS};
use structure::{global_stats, kcore_numbers, pagerank, wedge_triangle_counts, COMPACT_GLOBALS};
use summary::{summarize, summary_names};

pub use orbits::EdgeOrbitCounts;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Schema {
    Regular,
    Graphlets,
    Compact,
    RegPlusGraphlets,
}

impl Schema {
    pub const ALL: [Schema; 4] = [Schema::Regular, Schema::Graphlets, Schema::Compact, Schema::RegPlusGraphlets];

    pub fn dim(self) -> usize {
        match self {
            Schema::Regular => 318,
            Schema::Graphlets => 756,
            Schema::Compact => 58,
            Schema::RegPlusGraphlets => 1074,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Schema::Regular => "regular",
            Schema::Graphlets => "graphlets",
            Schema::Compact => "compact",
            Schema::RegPlusGraphlets => "reg_plus_graphlets",
        }
    }

    /// Column names, one per feature.
    pub fn feature_names(self) -> Vec<String> {
        let sigma = summary_names();
        let summarized = |prefix: &str| sigma.iter().map(move |s| format!("{prefix}.{s}")).collect::<Vec<_>>();
        let regular = || {
            let mut names: Vec<String> = NODE_DISTRIBUTIONS.iter().flat_map(|d| summarized(d)).collect();
            names.extend(["density", "symmetrized_density", "assortativity"].map(String::from));
            names
        };
        let graphlets = || -> Vec<String> { EdgeOrbit::ALL.iter().flat_map(|o| summarized(o.name())).collect() };
        match self {
            Schema::Regular => regular(),
            Schema::Graphlets => graphlets(),
            Schema::Compact => {
                let mut names: Vec<String> = COMPACT_GLOBALS.iter().map(|s| s.to_string()).collect();
                for o in EdgeOrbit::ALL {
                    for stat in ["mean", "median", "max"] {
                        names.push(format!("{}.{stat}", o.name()));
                    }
                }
                for g in FOUR_NODE_GRAPHLETS {
                    names.push(format!("freq.{g}"));
                }
                names
            }
            Schema::RegPlusGraphlets => {
                let mut names = regular();
                names.extend(graphlets());
                names
            }
        }
    }
}

impl fmt::Display for Schema {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Schema {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Schema::ALL
            .into_iter()
            .find(|schema| schema.as_str() == s)
            .ok_or_else(|| Error::invalid(format!("unknown schema {s:?}")))
    }
}

/// Node-level distributions of the regular schema, in order.
pub const NODE_DISTRIBUTIONS: [&str; 5] = ["degree", "kcore", "pagerank", "wedges", "triangles"];

/// Connected 4-node graphlets, in frequency-vector order.
pub const FOUR_NODE_GRAPHLETS: [&str; 6] = ["path", "star", "cycle", "tailed_triangle", "diamond", "clique"];

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Level {
    Node,
    Edge,
}

/// Values of one structural feature over a graph's nodes or edges.
#[derive(Clone, Debug, PartialEq)]
pub struct Distribution {
    pub name: String,
    pub level: Level,
    pub values: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MetaFeatureVector {
    pub graph_id: String,
    pub schema: Schema,
    pub values: Vec<f64>,
}

/// Side information collected during extraction.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct ExtractionLog {
    /// Summary entries that were non-finite and replaced by zero.
    pub replaced_non_finite: usize,
    pub pagerank_converged: bool,
}

#[derive(Clone, Copy, Debug)]
pub struct ExtractOptions {
    pub orbit_mode: OrbitMode,
    pub pagerank_damping: f64,
    pub pagerank_tol: f64,
    pub pagerank_max_iter: usize,
}

impl Default for ExtractOptions {
    fn default() -> Self {
        ExtractOptions {
            orbit_mode: OrbitMode::Exact,
            pagerank_damping: 0.85,
            pagerank_tol: 1e-8,
            pagerank_max_iter: 200,
        }
    }
}

/// Structural distributions of a graph, computed once and shared by all schemas.
pub struct Structure {
    pub node: Vec<Distribution>,
    pub orbits: EdgeOrbitCounts,
    pub globals: std::collections::BTreeMap<&'static str, f64>,
    pub pagerank_converged: bool,
}

impl Structure {
    pub fn extract(g: &Graph, options: &ExtractOptions) -> Self {
        let adj = g.adjacency();
        let n = adj.n();
        let degree: Vec<f64> = (0..n).map(|v| adj.degree(v) as f64).collect();
        let cores = kcore_numbers(&adj);
        let pr = pagerank(&adj, options.pagerank_damping, options.pagerank_tol, options.pagerank_max_iter);
        let (wedges, triangles) = wedge_triangle_counts(&adj);
        let orbits = edge_orbit_counts(&adj, options.orbit_mode);
        let globals = global_stats(g, &adj, &cores, &orbits);
        let node_values = [
            degree,
            cores.iter().map(|&c| c as f64).collect(),
            pr.scores,
            wedges,
            triangles,
        ];
        let node = NODE_DISTRIBUTIONS
            .iter()
            .zip(node_values)
            .map(|(name, values)| Distribution {
                name: name.to_string(),
                level: Level::Node,
                values,
            })
            .collect();
        Structure {
            node,
            orbits,
            globals,
            pagerank_converged: pr.converged,
        }
    }

    pub fn edge_distributions(&self) -> Vec<Distribution> {
        EdgeOrbit::ALL
            .iter()
            .zip(self.orbits.distributions())
            .map(|(o, values)| Distribution {
                name: o.name().to_string(),
                level: Level::Edge,
                values,
            })
            .collect()
    }

    fn regular(&self, log: &mut ExtractionLog) -> Vec<f64> {
        let mut out = Vec::with_capacity(318);
        for d in &self.node {
            let s = summarize(&d.values);
            log.replaced_non_finite += s.replaced;
            out.extend_from_slice(&s.values);
        }
        out.push(self.globals["density"]);
        out.push(self.globals["symmetrized_density"]);
        out.push(self.globals["assortativity"]);
        out
    }

    fn graphlets(&self, log: &mut ExtractionLog) -> Vec<f64> {
        let mut out = Vec::with_capacity(756);
        for values in self.orbits.distributions() {
            let s = summarize(&values);
            log.replaced_non_finite += s.replaced;
            out.extend_from_slice(&s.values);
        }
        out
    }

    fn compact(&self) -> Vec<f64> {
        let mut out: Vec<f64> = COMPACT_GLOBALS.iter().map(|k| self.globals[k]).collect();
        for mut values in self.orbits.distributions() {
            if values.is_empty() {
                out.extend([0.0; 3]);
                continue;
            }
            values.sort_by(f64::total_cmp);
            let mean = values.iter().sum::<f64>() / values.len() as f64;
            out.push(mean);
            out.push(summary::quantile_sorted(&values, 0.5));
            out.push(values[values.len() - 1]);
        }
        out.extend(four_node_graphlet_frequencies(&self.orbits));
        debug_assert_eq!(out.len(), 16 + 3 * N_ORBITS + 6);
        out
    }

    pub fn features(&self, g: &Graph, schema: Schema) -> (MetaFeatureVector, ExtractionLog) {
        let mut log = ExtractionLog {
            pagerank_converged: self.pagerank_converged,
            ..Default::default()
        };
        let values = match schema {
            Schema::Regular => self.regular(&mut log),
            Schema::Graphlets => self.graphlets(&mut log),
            Schema::Compact => self.compact(),
            Schema::RegPlusGraphlets => {
                let mut v = self.regular(&mut log);
                v.extend(self.graphlets(&mut log));
                v
            }
        };
        let mut values = values;
        for v in values.iter_mut() {
            if !v.is_finite() {
                *v = 0.0;
                log.replaced_non_finite += 1;
            }
        }
        if log.replaced_non_finite > 0 {
            log::warn!("{}: replaced {} non-finite features with 0", g.id, log.replaced_non_finite);
        }
        debug_assert_eq!(values.len(), schema.dim());
        (
            MetaFeatureVector {
                graph_id: g.id.clone(),
                schema,
                values,
            },
            log,
        )
    }
}

/// Extracts the meta-feature vector of `g` under `schema`.
pub fn meta_features(g: &Graph, schema: Schema) -> MetaFeatureVector {
    extract(g, schema, &ExtractOptions::default()).0
}

pub fn extract(g: &Graph, schema: Schema, options: &ExtractOptions) -> (MetaFeatureVector, ExtractionLog) {
    Structure::extract(g, options).features(g, schema)
}
