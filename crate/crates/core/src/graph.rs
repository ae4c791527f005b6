//! Simple graphs, edge-list ingestion and the graph catalog.

use std::collections::{HashMap, HashSet};
use std::fs;
use std::io::{BufRead, BufReader, Read};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A simple graph: no self-loops, no parallel edges.
///
/// Undirected edges are stored canonically as `(u, v)` with `u < v`.
#[derive(Clone, Debug, PartialEq)]
pub struct Graph {
    pub id: String,
    pub name: String,
    pub domain: String,
    n: usize,
    edges: Vec<(usize, usize)>,
    directed: bool,
    node_labels: Option<Vec<u32>>,
}

impl Graph {
    /// Builds a graph, dropping self-loops and duplicate edges (first occurrence wins).
    pub fn new(n: usize, edges: impl IntoIterator<Item = (usize, usize)>, directed: bool) -> Result<Self> {
        let mut seen = HashSet::new();
        let mut kept = Vec::new();
        for (u, v) in edges {
            if u >= n || v >= n {
                return Err(Error::invalid(format!(
                    "edge ({u}, {v}) out of range for {n} nodes"
                )));
            }
            if u == v {
                continue;
            }
            let e = if directed { (u, v) } else { (u.min(v), u.max(v)) };
            if seen.insert(e) {
                kept.push(e);
            }
        }
        Ok(Graph {
            id: String::new(),
            name: String::new(),
            domain: String::new(),
            n,
            edges: kept,
            directed,
            node_labels: None,
        })
    }

    pub fn with_id(mut self, id: impl Into<String>) -> Self {
        self.id = id.into();
        self
    }

    pub fn with_domain(mut self, domain: impl Into<String>) -> Self {
        self.domain = domain.into();
        self
    }

    pub fn with_name(mut self, name: impl Into<String>) -> Self {
        self.name = name.into();
        self
    }

    pub fn with_node_labels(mut self, labels: Vec<u32>) -> Result<Self> {
        if labels.len() != self.n {
            return Err(Error::invalid(format!(
                "{} node labels for {} nodes",
                labels.len(),
                self.n
            )));
        }
        self.node_labels = Some(labels);
        Ok(self)
    }

    #[inline]
    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn m(&self) -> usize {
        self.edges.len()
    }

    #[inline]
    pub fn directed(&self) -> bool {
        self.directed
    }

    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    pub fn node_labels(&self) -> Option<&[u32]> {
        self.node_labels.as_deref()
    }

    /// Undirected version: `{u, v}` is an edge iff `(u, v)` or `(v, u)` was.
    pub fn symmetrize(&self) -> Graph {
        if !self.directed {
            return self.clone();
        }
        let mut g = Graph::new(self.n, self.edges.iter().copied(), false)
            .expect("indices already validated");
        g.id.clone_from(&self.id);
        g.name.clone_from(&self.name);
        g.domain.clone_from(&self.domain);
        g.node_labels.clone_from(&self.node_labels);
        g
    }

    /// Number of possible edges: `n(n-1)/2` undirected, `n(n-1)` directed.
    pub fn max_edges(&self) -> usize {
        let pairs = self.n * self.n.saturating_sub(1);
        if self.directed {
            pairs
        } else {
            pairs / 2
        }
    }

    pub fn density(&self) -> f64 {
        match self.max_edges() {
            0 => 0.0,
            max => self.m() as f64 / max as f64,
        }
    }

    /// Sorted neighbor lists of the symmetrized graph.
    pub fn adjacency(&self) -> Adjacency {
        let mut nbrs = vec![Vec::new(); self.n];
        for &(u, v) in &self.edges {
            nbrs[u].push(v);
            nbrs[v].push(u);
        }
        for list in &mut nbrs {
            list.sort_unstable();
            list.dedup();
        }
        Adjacency { nbrs }
    }

    /// Undirected degree sequence.
    pub fn degrees(&self) -> Vec<usize> {
        self.adjacency().nbrs.iter().map(Vec::len).collect()
    }
}

/// Undirected adjacency with sorted neighbor lists.
#[derive(Clone, Debug)]
pub struct Adjacency {
    nbrs: Vec<Vec<usize>>,
}

impl Adjacency {
    #[inline]
    pub fn n(&self) -> usize {
        self.nbrs.len()
    }

    #[inline]
    pub fn neighbors(&self, v: usize) -> &[usize] {
        &self.nbrs[v]
    }

    #[inline]
    pub fn degree(&self, v: usize) -> usize {
        self.nbrs[v].len()
    }

    pub fn has_edge(&self, u: usize, v: usize) -> bool {
        self.nbrs[u].binary_search(&v).is_ok()
    }

    /// Each undirected edge once, as `(u, v)` with `u < v`, in lexicographic order.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.nbrs
            .iter()
            .enumerate()
            .flat_map(|(u, list)| list.iter().filter(move |&&v| v > u).map(move |&v| (u, v)))
    }

    pub fn m(&self) -> usize {
        self.nbrs.iter().map(Vec::len).sum::<usize>() / 2
    }
}

#[derive(Clone, Debug)]
pub struct LoadOptions {
    pub directed: bool,
    pub comment_prefix: char,
}

impl Default for LoadOptions {
    fn default() -> Self {
        LoadOptions {
            directed: false,
            comment_prefix: '#',
        }
    }
}

/// Reads a whitespace-separated edge list. Node ids are re-indexed densely in
/// order of first appearance; tokens after the second are ignored.
pub fn load_edge_list(path: impl AsRef<Path>, options: &LoadOptions) -> Result<Graph> {
    let path = path.as_ref();
    let file = fs::File::open(path).map_err(|e| Error::io(path, e))?;
    let g = parse_edge_list(file, path, options)?;
    log::debug!("loaded {}: n={} m={}", path.display(), g.n(), g.m());
    Ok(g)
}

pub fn parse_edge_list(reader: impl Read, path: &Path, options: &LoadOptions) -> Result<Graph> {
    let mut index: HashMap<i64, usize> = HashMap::new();
    let mut edges = Vec::new();
    let mut intern = |raw: i64| -> usize {
        let next = index.len();
        *index.entry(raw).or_insert(next)
    };
    for (lineno, line) in BufReader::new(reader).lines().enumerate() {
        let line = line.map_err(|e| Error::io(path, e))?;
        let trimmed = line.trim();
        if trimmed.is_empty() || trimmed.starts_with(options.comment_prefix) {
            continue;
        }
        let mut tokens = trimmed.split_whitespace();
        let mut endpoint = || -> Result<i64> {
            let tok = tokens.next().ok_or_else(|| Error::Parse {
                path: path.to_path_buf(),
                line: lineno + 1,
                message: "expected at least two node ids".into(),
            })?;
            tok.parse::<i64>().map_err(|_| Error::Parse {
                path: path.to_path_buf(),
                line: lineno + 1,
                message: format!("invalid node id {tok:?}"),
            })
        };
        let (a, b) = (endpoint()?, endpoint()?);
        edges.push((intern(a), intern(b)));
    }
    let g = Graph::new(index.len(), edges, options.directed)?;
    if g.m() == 0 {
        return Err(Error::EmptyGraph);
    }
    Ok(g)
}

/// Reads `node_index label` lines; every node must be labelled exactly once.
pub fn load_node_labels(path: impl AsRef<Path>, n: usize) -> Result<Vec<u32>> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let mut labels: Vec<Option<u32>> = vec![None; n];
    for (lineno, line) in text.lines().enumerate() {
        let trimmed = line.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        let parse_err = |message: String| Error::Parse {
            path: path.to_path_buf(),
            line: lineno + 1,
            message,
        };
        let mut tokens = trimmed.split_whitespace();
        let (Some(node), Some(label)) = (tokens.next(), tokens.next()) else {
            return Err(parse_err("expected `node_index label`".into()));
        };
        let node: usize = node
            .parse()
            .map_err(|_| parse_err(format!("invalid node index {node:?}")))?;
        let label: u32 = label
            .parse()
            .map_err(|_| parse_err(format!("invalid label {label:?}")))?;
        if node >= n {
            return Err(parse_err(format!("node {node} out of range for {n} nodes")));
        }
        if labels[node].replace(label).is_some() {
            return Err(parse_err(format!("node {node} labelled twice")));
        }
    }
    labels
        .into_iter()
        .enumerate()
        .map(|(v, l)| l.ok_or_else(|| Error::invalid(format!("node {v} has no label in {}", path.display()))))
        .collect()
}

/// One row of the graph catalog CSV.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CatalogEntry {
    pub graph_id: String,
    pub name: String,
    pub domain: String,
    pub n_nodes: usize,
    pub n_edges: usize,
    pub has_labels: bool,
}

/// Graph catalog: `graph_id,name,domain,n_nodes,n_edges,has_labels`.
///
/// Edge lists live next to the catalog as `<graph_id>.edges`, node labels as
/// `<graph_id>.labels`.
#[derive(Clone, Debug)]
pub struct Catalog {
    pub dir: PathBuf,
    pub entries: Vec<CatalogEntry>,
}

impl Catalog {
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let mut reader = csv::Reader::from_path(path).map_err(|e| Error::csv(path, e))?;
        let mut entries = Vec::new();
        let mut ids = HashSet::new();
        for row in reader.deserialize::<CatalogEntry>() {
            let entry = row.map_err(|e| Error::csv(path, e))?;
            if !ids.insert(entry.graph_id.clone()) {
                return Err(Error::invalid(format!("duplicate graph_id {}", entry.graph_id)));
            }
            entries.push(entry);
        }
        Ok(Catalog {
            dir: path.parent().map(Path::to_path_buf).unwrap_or_default(),
            entries,
        })
    }

    pub fn save(entries: &[CatalogEntry], path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let mut w = csv::Writer::from_path(path).map_err(|e| Error::csv(path, e))?;
        for e in entries {
            w.serialize(e).map_err(|e| Error::csv(path, e))?;
        }
        w.flush().map_err(|e| Error::io(path, e))
    }

    pub fn edge_list_path(&self, entry: &CatalogEntry) -> PathBuf {
        self.dir.join(format!("{}.edges", entry.graph_id))
    }

    pub fn labels_path(&self, entry: &CatalogEntry) -> PathBuf {
        self.dir.join(format!("{}.labels", entry.graph_id))
    }

    /// Loads one catalogued graph (undirected) with its metadata attached.
    pub fn load_graph(&self, entry: &CatalogEntry) -> Result<Graph> {
        let g = load_edge_list(self.edge_list_path(entry), &LoadOptions::default())?
            .with_id(&entry.graph_id)
            .with_name(&entry.name)
            .with_domain(&entry.domain);
        if entry.has_labels {
            let labels = load_node_labels(self.labels_path(entry), g.n())?;
            g.with_node_labels(labels)
        } else {
            Ok(g)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(text: &str) -> Result<Graph> {
        parse_edge_list(text.as_bytes(), Path::new("<mem>"), &LoadOptions::default())
    }

    #[test]
    fn triangle() {
        let g = parse("0 1\n1 2\n2 0").unwrap();
        assert_eq!((g.n(), g.m()), (3, 3));
        assert!(!g.directed());
    }

    #[test]
    fn duplicates_and_self_loops_dropped() {
        let g = parse("0 1\n0 1\n1 1").unwrap();
        assert_eq!((g.n(), g.m()), (2, 1));
    }

    #[test]
    fn k4_with_comments_and_weights() {
        let g = parse("# K4\n0 1 0.5\n0 2\n0 3\n1 2\n1 3\n\n2 3 7\n").unwrap();
        assert_eq!((g.n(), g.m()), (4, 6));
        assert_eq!(g.density(), 1.0);
    }

    #[test]
    fn reindexes_by_first_appearance() {
        let g = parse("10 7\n7 42").unwrap();
        assert_eq!(g.edges(), &[(0, 1), (1, 2)]);
    }

    #[test]
    fn malformed_line_reports_line_number() {
        match parse("0 1\n2 x\n") {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 2),
            other => panic!("unexpected {other:?}"),
        }
        assert!(matches!(parse("0 1\n3\n"), Err(Error::Parse { line: 2, .. })));
    }

    #[test]
    fn empty_graph_is_an_error() {
        assert!(matches!(parse("# nothing\n"), Err(Error::EmptyGraph)));
        assert!(matches!(parse("4 4\n"), Err(Error::EmptyGraph)));
    }

    #[test]
    fn symmetrize_directed() {
        let g = Graph::new(2, [(0, 1)], true).unwrap();
        let s = g.symmetrize();
        assert!(!s.directed());
        assert_eq!(s.edges(), &[(0, 1)]);

        let g = Graph::new(2, [(0, 1), (1, 0)], true).unwrap();
        assert_eq!(g.m(), 2);
        assert_eq!(g.symmetrize().m(), 1);

        let tri = Graph::new(3, [(0, 1), (1, 2), (0, 2)], false).unwrap();
        assert_eq!(tri.symmetrize(), tri);
    }

    #[test]
    fn density_directed_and_undirected() {
        let g = Graph::new(3, [(0, 1), (1, 2)], true).unwrap();
        assert!((g.density() - 2.0 / 6.0).abs() < 1e-15);
        assert!((g.symmetrize().density() - 2.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn labels_length_checked() {
        let g = Graph::new(3, [(0, 1)], false).unwrap();
        assert!(g.clone().with_node_labels(vec![0, 1]).is_err());
        assert!(g.with_node_labels(vec![0, 1, 1]).is_ok());
    }

    #[test]
    fn isolated_nodes_are_kept() {
        let g = Graph::new(5, [(0, 1)], false).unwrap();
        assert_eq!(g.degrees(), vec![1, 1, 0, 0, 0]);
    }
}
