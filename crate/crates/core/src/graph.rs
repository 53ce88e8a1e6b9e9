//! Simple, connected, undirected graphs with dense `0..n` vertex ids.

use std::collections::{BTreeMap, VecDeque};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Graph {
    adjacency: Vec<Vec<usize>>,
    edges: Vec<(usize, usize)>,
}

/// `open` is the 1-hop neighborhood, `closed` adds the vertex itself.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Neighborhoods {
    pub open: Vec<usize>,
    pub closed: Vec<usize>,
}

/// Hop distances from one source. `None` means unreachable or beyond the depth limit.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DistanceOracle {
    pub source: usize,
    pub dist: Vec<Option<u32>>,
}

impl DistanceOracle {
    pub fn get(&self, v: usize) -> Option<u32> {
        self.dist[v]
    }
}

impl Graph {
    /// Builds and validates a graph: no self-loops, no duplicate edges, at least
    /// one edge, and connected.
    pub fn new(vertex_count: usize, edges: impl IntoIterator<Item = (usize, usize)>) -> Result<Self> {
        let g = Self::build(vertex_count, edges)?;
        if !g.is_connected() {
            return Err(Error::GraphInvalid("graph is disconnected".into()));
        }
        Ok(g)
    }

    /// Same checks as [`Graph::new`] except connectivity.
    pub(crate) fn build(vertex_count: usize, edges: impl IntoIterator<Item = (usize, usize)>) -> Result<Self> {
        if vertex_count < 2 {
            return Err(Error::GraphInvalid(format!(
                "need at least 2 vertices, got {vertex_count}"
            )));
        }
        let mut adjacency = vec![Vec::new(); vertex_count];
        let mut canonical = Vec::new();
        for (a, b) in edges {
            if a >= vertex_count || b >= vertex_count {
                return Err(Error::VertexOutOfRange {
                    vertex: a.max(b),
                    vertex_count,
                });
            }
            if a == b {
                return Err(Error::GraphInvalid(format!("self-loop at vertex {a}")));
            }
            canonical.push((a.min(b), a.max(b)));
            adjacency[a].push(b);
            adjacency[b].push(a);
        }
        canonical.sort_unstable();
        if let Some(w) = canonical.windows(2).find(|w| w[0] == w[1]) {
            return Err(Error::GraphInvalid(format!("duplicate edge ({}, {})", w[0].0, w[0].1)));
        }
        for list in &mut adjacency {
            list.sort_unstable();
        }
        Ok(Graph {
            adjacency,
            edges: canonical,
        })
    }

    pub fn vertex_count(&self) -> usize {
        self.adjacency.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    /// Canonical `(u, v)` pairs with `u < v`, sorted lexicographically.
    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    pub fn neighbors(&self, u: usize) -> &[usize] {
        &self.adjacency[u]
    }

    pub fn degree(&self, u: usize) -> usize {
        self.adjacency[u].len()
    }

    pub fn has_edge(&self, u: usize, v: usize) -> bool {
        u < self.vertex_count() && self.adjacency[u].binary_search(&v).is_ok()
    }

    pub fn check_vertex(&self, u: usize) -> Result<()> {
        if u < self.vertex_count() {
            Ok(())
        } else {
            Err(Error::VertexOutOfRange {
                vertex: u,
                vertex_count: self.vertex_count(),
            })
        }
    }

    pub fn neighborhoods(&self, u: usize) -> Neighborhoods {
        let open = self.adjacency[u].clone();
        let mut closed = open.clone();
        let pos = closed.binary_search(&u).unwrap_err();
        closed.insert(pos, u);
        Neighborhoods { open, closed }
    }

    /// The extended neighborhood `N(u) ∪ {u}`, sorted.
    pub fn closed_neighborhood(&self, u: usize) -> Vec<usize> {
        self.neighborhoods(u).closed
    }

    pub fn bfs_distances(&self, source: usize, depth_limit: Option<u32>) -> DistanceOracle {
        let mut dist = vec![None; self.vertex_count()];
        dist[source] = Some(0);
        let mut queue = VecDeque::from([source]);
        while let Some(x) = queue.pop_front() {
            let dx = dist[x].unwrap();
            if depth_limit.is_some_and(|limit| dx >= limit) {
                continue;
            }
            for &y in &self.adjacency[x] {
                if dist[y].is_none() {
                    dist[y] = Some(dx + 1);
                    queue.push_back(y);
                }
            }
        }
        DistanceOracle { source, dist }
    }

    pub fn is_connected(&self) -> bool {
        self.bfs_distances(0, None).dist.iter().all(Option::is_some)
    }

    /// Largest BFS eccentricity.
    pub fn diameter(&self) -> u32 {
        (0..self.vertex_count())
            .map(|s| {
                self.bfs_distances(s, None)
                    .dist
                    .iter()
                    .map(|d| d.expect("connected graph"))
                    .max()
                    .unwrap_or(0)
            })
            .max()
            .unwrap_or(0)
    }

    /// `Some(d)` when every vertex has degree `d`.
    pub fn regular_degree(&self) -> Option<usize> {
        let d = self.degree(0);
        (0..self.vertex_count()).all(|u| self.degree(u) == d).then_some(d)
    }

    pub fn common_neighbors(&self, u: usize, v: usize) -> Vec<usize> {
        sorted_intersection(self.neighbors(u), self.neighbors(v))
    }

    /// New graph with one extra edge. Fails if the edge exists or is a loop.
    pub fn with_edge(&self, u: usize, v: usize) -> Result<Graph> {
        let mut edges = self.edges.clone();
        edges.push((u, v));
        Graph::build(self.vertex_count(), edges)
    }

    /// New graph without `(u, v)`. The result may be disconnected.
    pub fn without_edge(&self, u: usize, v: usize) -> Result<Graph> {
        let key = (u.min(v), u.max(v));
        if !self.has_edge(u, v) {
            return Err(Error::NotAnEdge(u, v));
        }
        Graph::build(self.vertex_count(), self.edges.iter().copied().filter(|&e| e != key))
    }

    pub fn to_edge_list(&self) -> String {
        let mut out = String::new();
        for &(u, v) in &self.edges {
            out.push_str(&format!("{u}\t{v}\n"));
        }
        out
    }

    pub fn to_json(&self) -> GraphJson {
        GraphJson {
            n: self.vertex_count(),
            edges: self.edges.iter().map(|&(u, v)| [u, v]).collect(),
        }
    }
}

pub(crate) fn sorted_intersection(a: &[usize], b: &[usize]) -> Vec<usize> {
    let (mut i, mut j) = (0, 0);
    let mut out = Vec::new();
    while i < a.len() && j < b.len() {
        match a[i].cmp(&b[j]) {
            std::cmp::Ordering::Less => i += 1,
            std::cmp::Ordering::Greater => j += 1,
            std::cmp::Ordering::Equal => {
                out.push(a[i]);
                i += 1;
                j += 1;
            }
        }
    }
    out
}

/// `{"n": int, "edges": [[u, v], ...]}`
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GraphJson {
    pub n: usize,
    pub edges: Vec<[usize; 2]>,
}

/// A parsed graph plus the original id of each dense vertex index.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LabeledGraph {
    pub graph: Graph,
    pub labels: Vec<u64>,
}

impl LabeledGraph {
    pub fn is_identity(&self) -> bool {
        self.labels.iter().enumerate().all(|(i, &l)| l == i as u64)
    }

    pub fn label(&self, v: usize) -> u64 {
        self.labels[v]
    }
}

/// Parses `u v` lines (tab or any whitespace). `#` comments and blank lines are
/// skipped. Sparse ids are compacted in ascending order.
pub fn parse_edge_list(text: &str) -> Result<LabeledGraph> {
    let mut raw = Vec::new();
    for (idx, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let fields: Vec<&str> = line.split_whitespace().collect();
        if fields.len() != 2 {
            return Err(Error::Parse {
                line: idx + 1,
                message: format!("expected two vertex ids, found {}", fields.len()),
            });
        }
        let parse = |s: &str| {
            s.parse::<u64>().map_err(|_| Error::Parse {
                line: idx + 1,
                message: format!("not a non-negative integer: {s:?}"),
            })
        };
        raw.push((parse(fields[0])?, parse(fields[1])?));
    }
    if raw.is_empty() {
        return Err(Error::GraphInvalid("no edges".into()));
    }
    if let Some(&(a, _)) = raw.iter().find(|(a, b)| a == b) {
        return Err(Error::GraphInvalid(format!("self-loop at vertex {a}")));
    }
    let mut ids: BTreeMap<u64, usize> = raw.iter().flat_map(|&(a, b)| [(a, 0), (b, 0)]).collect();
    let labels: Vec<u64> = ids.keys().copied().collect();
    for (i, slot) in ids.values_mut().enumerate() {
        *slot = i;
    }
    let graph = Graph::new(labels.len(), raw.iter().map(|(a, b)| (ids[a], ids[b])))?;
    Ok(LabeledGraph { graph, labels })
}

pub fn parse_json(text: &str) -> Result<Graph> {
    let parsed: GraphJson = serde_json::from_str(text).map_err(|e| Error::Format(format!("graph JSON: {e}")))?;
    Graph::new(parsed.n, parsed.edges.iter().map(|e| (e[0], e[1])))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GraphFormat {
    EdgeList,
    Json,
}

impl GraphFormat {
    pub fn from_path(path: &Path) -> Self {
        match path.extension().and_then(|e| e.to_str()) {
            Some(ext) if ext.eq_ignore_ascii_case("json") => GraphFormat::Json,
            _ => GraphFormat::EdgeList,
        }
    }

    pub fn parse_name(name: &str) -> Option<Self> {
        match name {
            "edgelist" | "edge-list" | "txt" | "tsv" => Some(GraphFormat::EdgeList),
            "json" => Some(GraphFormat::Json),
            _ => None,
        }
    }
}

pub fn parse_graph(text: &str, format: GraphFormat) -> Result<LabeledGraph> {
    match format {
        GraphFormat::EdgeList => parse_edge_list(text),
        GraphFormat::Json => {
            let graph = parse_json(text)?;
            let labels = (0..graph.vertex_count() as u64).collect();
            Ok(LabeledGraph { graph, labels })
        }
    }
}

pub fn render_graph(g: &Graph, format: GraphFormat) -> String {
    match format {
        GraphFormat::EdgeList => g.to_edge_list(),
        GraphFormat::Json => {
            let mut s = serde_json::to_string(&g.to_json()).expect("graph serializes");
            s.push('\n');
            s
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p3() -> Graph {
        parse_edge_list("0 1\n1 2").unwrap().graph
    }

    fn k3() -> Graph {
        parse_edge_list("0 1\n1 2\n2 0").unwrap().graph
    }

    #[test]
    fn parses_small_graphs() {
        let g = p3();
        assert_eq!((g.vertex_count(), g.edge_count()), (3, 2));
        let g = k3();
        assert_eq!(g.edges(), &[(0, 1), (0, 2), (1, 2)]);
        let g = parse_edge_list("# comment\n\n0\t1\n  1   2  \n").unwrap().graph;
        assert_eq!(g, p3());
    }

    #[test]
    fn rejects_bad_input() {
        assert!(matches!(parse_edge_list("0 0"), Err(Error::GraphInvalid(_))));
        assert!(matches!(parse_edge_list("0 1\n1 0"), Err(Error::GraphInvalid(_))));
        assert!(matches!(parse_edge_list("0 1\n2 3"), Err(Error::GraphInvalid(_))));
        assert!(matches!(parse_edge_list("0 1 2"), Err(Error::Parse { line: 1, .. })));
        assert!(matches!(parse_edge_list("0 x"), Err(Error::Parse { .. })));
        assert!(matches!(parse_edge_list("0 -1"), Err(Error::Parse { .. })));
        assert!(matches!(parse_edge_list(""), Err(Error::GraphInvalid(_))));
    }

    #[test]
    fn compacts_sparse_ids() {
        let lg = parse_edge_list("10 30\n30 7").unwrap();
        assert_eq!(lg.labels, vec![7, 10, 30]);
        assert_eq!(lg.graph.edges(), &[(0, 2), (1, 2)]);
        assert!(!lg.is_identity());
    }

    #[test]
    fn json_round_trip() {
        let g = k3();
        let text = render_graph(&g, GraphFormat::Json);
        assert_eq!(text, "{\"n\":3,\"edges\":[[0,1],[0,2],[1,2]]}\n");
        assert_eq!(parse_json(&text).unwrap(), g);
        assert!(parse_json("{\"n\":3,\"edges\":[[0,1]]}").is_err());
    }

    #[test]
    fn bfs_examples() {
        assert_eq!(p3().bfs_distances(0, None).dist, vec![Some(0), Some(1), Some(2)]);
        assert_eq!(k3().bfs_distances(0, None).dist, vec![Some(0), Some(1), Some(1)]);
        let limited = p3().bfs_distances(0, Some(1));
        assert_eq!(limited.dist, vec![Some(0), Some(1), None]);
    }

    #[test]
    fn neighborhood_examples() {
        let nb = k3().neighborhoods(0);
        assert_eq!((nb.open, nb.closed), (vec![1, 2], vec![0, 1, 2]));
        let nb = p3().neighborhoods(1);
        assert_eq!((nb.open, nb.closed), (vec![0, 2], vec![0, 1, 2]));
    }

    #[test]
    fn edge_edits() {
        let g = p3().with_edge(0, 2).unwrap();
        assert_eq!(g, k3());
        assert!(k3().with_edge(0, 1).is_err());
        let h = k3().without_edge(1, 0).unwrap();
        assert_eq!(h.edges(), &[(0, 2), (1, 2)]);
        assert!(!p3().without_edge(0, 1).unwrap().is_connected());
    }
}
