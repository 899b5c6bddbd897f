//! Immutable undirected simple graph stored as indexed adjacency lists.

use crate::NodeId;
use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum GraphError {
    #[error("malformed input at line {line}: {reason}")]
    Malformed { line: usize, reason: String },
    #[error("self-loop on node {0} rejected")]
    SelfLoop(u64),
    #[error("node id {id} out of range (n = {n})")]
    NodeOutOfRange { id: NodeId, n: usize },
    #[error("edge list must be nonempty to build a graph")]
    Empty,
}

/// Undirected simple graph over nodes `0..n-1`. Immutable after
/// construction and safe to share across concurrent readers.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Graph {
    n: usize,
    adjacency: Vec<Vec<NodeId>>,
    m: usize,
}

impl Graph {
    /// Builds a graph on `n` nodes from an edge list. Duplicate edges are
    /// collapsed; self-loops are rejected.
    pub fn from_edges(n: usize, edges: &[(NodeId, NodeId)]) -> Result<Self, GraphError> {
        let mut adjacency: Vec<Vec<NodeId>> = vec![Vec::new(); n];
        for &(u, v) in edges {
            if u == v {
                return Err(GraphError::SelfLoop(u as u64));
            }
            for id in [u, v] {
                if id >= n {
                    return Err(GraphError::NodeOutOfRange { id, n });
                }
            }
            adjacency[u].push(v);
            adjacency[v].push(u);
        }
        let mut m = 0;
        for list in adjacency.iter_mut() {
            list.sort_unstable();
            list.dedup();
            m += list.len();
        }
        Ok(Graph {
            n,
            adjacency,
            m: m / 2,
        })
    }

    /// Edgeless graph on `n` nodes.
    pub fn edgeless(n: usize) -> Self {
        Graph {
            n,
            adjacency: vec![Vec::new(); n],
            m: 0,
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn degree(&self, v: NodeId) -> usize {
        self.adjacency[v].len()
    }

    /// Sorted neighbor list of `v`.
    pub fn neighbors(&self, v: NodeId) -> &[NodeId] {
        &self.adjacency[v]
    }

    pub fn has_edge(&self, u: NodeId, v: NodeId) -> bool {
        self.adjacency[u].binary_search(&v).is_ok()
    }

    /// All edges as (u, v) pairs with u < v, lexicographically sorted.
    pub fn edges(&self) -> Vec<(NodeId, NodeId)> {
        let mut out = Vec::with_capacity(self.m);
        for u in 0..self.n {
            for &v in &self.adjacency[u] {
                if u < v {
                    out.push((u, v));
                }
            }
        }
        out
    }

    /// Copy of this graph with one extra edge (used by sensitivity probes).
    pub fn with_edge(&self, u: NodeId, v: NodeId) -> Result<Self, GraphError> {
        let mut edges = self.edges();
        edges.push((u, v));
        Graph::from_edges(self.n.max(u.max(v) + 1), &edges)
    }
}

/// A graph loaded from an edge-list file, together with the mapping from
/// dense internal ids back to the original file ids.
#[derive(Debug, Clone)]
pub struct LoadedGraph {
    pub graph: Graph,
    /// `original_ids[i]` is the file id of internal node `i`.
    pub original_ids: Vec<u64>,
}

/// Parses the edge-list text format: lines `u v`, `#` comments, blank lines
/// ignored. Arbitrary nonnegative integer ids are remapped (sorted order) to
/// dense 0-based indices; the mapping is returned alongside the graph.
pub fn load_edge_list(text: &str) -> Result<LoadedGraph, GraphError> {
    let mut raw_edges: Vec<(u64, u64)> = Vec::new();
    for (idx, line) in text.lines().enumerate() {
        let line_no = idx + 1;
        let content = line.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let mut parts = content.split_whitespace();
        let parse = |tok: Option<&str>| -> Result<u64, GraphError> {
            tok.ok_or_else(|| GraphError::Malformed {
                line: line_no,
                reason: "expected two node ids".into(),
            })?
            .parse::<u64>()
            .map_err(|e| GraphError::Malformed {
                line: line_no,
                reason: format!("bad node id: {e}"),
            })
        };
        let u = parse(parts.next())?;
        let v = parse(parts.next())?;
        if parts.next().is_some() {
            return Err(GraphError::Malformed {
                line: line_no,
                reason: "expected exactly two node ids".into(),
            });
        }
        if u == v {
            return Err(GraphError::SelfLoop(u));
        }
        raw_edges.push((u, v));
    }
    let mut ids: Vec<u64> = raw_edges
        .iter()
        .flat_map(|&(u, v)| [u, v])
        .collect();
    ids.sort_unstable();
    ids.dedup();
    let index_of = |id: u64| ids.binary_search(&id).unwrap();
    let edges: Vec<(NodeId, NodeId)> = raw_edges
        .iter()
        .map(|&(u, v)| (index_of(u), index_of(v)))
        .collect();
    let graph = Graph::from_edges(ids.len(), &edges)?;
    Ok(LoadedGraph {
        graph,
        original_ids: ids,
    })
}

/// Erdős–Rényi G(n, p) with a deterministic seed (used by experiments and
/// tests; kept here so the CLI and test corpus share one generator).
pub fn erdos_renyi(n: usize, p: f64, seed: u64) -> Graph {
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha12Rng::seed_from_u64(seed);
    let mut edges = Vec::new();
    for u in 0..n {
        for v in (u + 1)..n {
            if rng.gen::<f64>() < p {
                edges.push((u, v));
            }
        }
    }
    Graph::from_edges(n, &edges).expect("generator emits valid edges")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn triangle_from_text() {
        let loaded = load_edge_list("0 1\n1 2\n0 2").unwrap();
        assert_eq!(loaded.graph.n(), 3);
        assert_eq!(loaded.graph.m(), 3);
        assert_eq!(loaded.original_ids, vec![0, 1, 2]);
    }

    #[test]
    fn duplicate_edges_collapse() {
        let loaded = load_edge_list("0 1\n0 1").unwrap();
        assert_eq!(loaded.graph.n(), 2);
        assert_eq!(loaded.graph.m(), 1);
    }

    #[test]
    fn self_loop_rejected() {
        assert_eq!(load_edge_list("0 0").unwrap_err(), GraphError::SelfLoop(0));
    }

    #[test]
    fn comments_and_blanks_ignored() {
        let loaded = load_edge_list("# header\n\n0 1 # inline\n 1 2 \n").unwrap();
        assert_eq!(loaded.graph.m(), 2);
    }

    #[test]
    fn malformed_line_reports_number() {
        match load_edge_list("0 1\nnope") {
            Err(GraphError::Malformed { line, .. }) => assert_eq!(line, 2),
            other => panic!("unexpected: {other:?}"),
        }
    }

    #[test]
    fn sparse_ids_remap_densely() {
        let loaded = load_edge_list("5 9\n9 12").unwrap();
        assert_eq!(loaded.graph.n(), 3);
        assert_eq!(loaded.original_ids, vec![5, 9, 12]);
        assert!(loaded.graph.has_edge(0, 1));
        assert!(loaded.graph.has_edge(1, 2));
    }

    #[test]
    fn symmetry_and_edge_count() {
        let g = erdos_renyi(60, 0.1, 7);
        let mut total = 0;
        for u in 0..g.n() {
            for &v in g.neighbors(u) {
                assert!(g.has_edge(v, u));
                assert_ne!(u, v);
            }
            total += g.degree(u);
        }
        assert_eq!(total, 2 * g.m());
    }
}
