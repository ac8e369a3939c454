//! Bounded-degree simple graphs, edge sets and the edge-list text format.

use std::collections::{BTreeSet, VecDeque};
use std::fmt::Write as _;

use serde::Serialize;
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GraphError {
    #[error("line {line}: {msg}")]
    ParseError { line: usize, msg: String },
    #[error("vertex {0} exceeds the degree bound")]
    DegreeExceeded(usize),
    #[error("loop edge at vertex {0}")]
    LoopEdge(usize),
    #[error("duplicate edge {0}-{1}")]
    DuplicateEdge(usize, usize),
    #[error("vertex {vertex} out of range for a graph on {n} vertices")]
    VertexOutOfRange { vertex: usize, n: usize },
    #[error("edge {0}-{1} is not present in the graph")]
    UnknownEdge(usize, usize),
    #[error("degree bound must be at least 1")]
    ZeroDegreeBound,
    #[error("header declares degree bound {header}, caller requested {requested}")]
    DegreeBoundMismatch { header: usize, requested: usize },
}

/// An unordered edge stored as `(u, v)` with `u < v`.
pub type Edge = (usize, usize);

#[inline]
pub fn edge(u: usize, v: usize) -> Edge {
    if u < v {
        (u, v)
    } else {
        (v, u)
    }
}

/// Simple undirected graph on `0..n` with an enforced degree bound.
///
/// Immutable after construction; every derivation returns a new graph.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Graph {
    adj: Vec<Vec<usize>>,
    degree_bound: usize,
}

impl Graph {
    /// Builds a graph from an edge list, validating every invariant.
    pub fn from_edges<I>(n: usize, degree_bound: usize, edges: I) -> Result<Self, GraphError>
    where
        I: IntoIterator<Item = (usize, usize)>,
    {
        if degree_bound == 0 {
            return Err(GraphError::ZeroDegreeBound);
        }
        let mut adj = vec![Vec::new(); n];
        for (u, v) in edges {
            for w in [u, v] {
                if w >= n {
                    return Err(GraphError::VertexOutOfRange { vertex: w, n });
                }
            }
            if u == v {
                return Err(GraphError::LoopEdge(u));
            }
            adj[u].push(v);
            adj[v].push(u);
        }
        for (v, list) in adj.iter_mut().enumerate() {
            list.sort_unstable();
            if let Some(w) = list.windows(2).find(|w| w[0] == w[1]) {
                let (a, b) = edge(v, w[0]);
                return Err(GraphError::DuplicateEdge(a, b));
            }
        }
        // Reported after duplicates so that a repeated edge is not misread as a degree violation.
        if let Some(v) = (0..n).find(|&v| adj[v].len() > degree_bound) {
            return Err(GraphError::DegreeExceeded(v));
        }
        Ok(Graph { adj, degree_bound })
    }

    /// Graph with `n` vertices and no edges.
    pub fn empty(n: usize, degree_bound: usize) -> Self {
        assert!(degree_bound >= 1);
        Graph {
            adj: vec![Vec::new(); n],
            degree_bound,
        }
    }

    #[inline]
    pub fn n(&self) -> usize {
        self.adj.len()
    }

    #[inline]
    pub fn degree_bound(&self) -> usize {
        self.degree_bound
    }

    #[inline]
    pub fn neighbors(&self, v: usize) -> &[usize] {
        &self.adj[v]
    }

    #[inline]
    pub fn degree(&self, v: usize) -> usize {
        self.adj[v].len()
    }

    pub fn max_degree(&self) -> usize {
        self.adj.iter().map(Vec::len).max().unwrap_or(0)
    }

    pub fn edge_count(&self) -> usize {
        self.adj.iter().map(Vec::len).sum::<usize>() / 2
    }

    pub fn has_edge(&self, u: usize, v: usize) -> bool {
        u < self.n() && self.adj[u].binary_search(&v).is_ok()
    }

    /// Edges in sorted order, each as `(u, v)` with `u < v`.
    pub fn edges(&self) -> impl Iterator<Item = Edge> + '_ {
        self.adj
            .iter()
            .enumerate()
            .flat_map(|(u, list)| list.iter().filter(move |&&v| u < v).map(move |&v| (u, v)))
    }

    pub fn edge_set(&self) -> EdgeSet {
        EdgeSet {
            edges: self.edges().collect(),
        }
    }

    /// Same graph with a different (larger or equal) degree bound.
    pub fn with_degree_bound(&self, degree_bound: usize) -> Result<Self, GraphError> {
        Graph::from_edges(self.n(), degree_bound, self.edges())
    }

    /// G∖Z on the same vertex set.
    pub fn remove_edges(&self, cut: &EdgeSet) -> Result<Graph, GraphError> {
        if let Some(&(u, v)) = cut.iter().find(|&&(u, v)| !self.has_edge(u, v)) {
            return Err(GraphError::UnknownEdge(u, v));
        }
        let adj = self
            .adj
            .iter()
            .enumerate()
            .map(|(u, list)| {
                list.iter()
                    .copied()
                    .filter(|&v| !cut.contains(u, v))
                    .collect()
            })
            .collect();
        Ok(Graph {
            adj,
            degree_bound: self.degree_bound,
        })
    }

    /// Spanning subgraph keeping only the listed edges.
    pub fn spanning_subgraph(&self, keep: &EdgeSet) -> Result<Graph, GraphError> {
        if let Some(&(u, v)) = keep.iter().find(|&&(u, v)| !self.has_edge(u, v)) {
            return Err(GraphError::UnknownEdge(u, v));
        }
        Graph::from_edges(self.n(), self.degree_bound, keep.iter().copied())
    }

    /// Connected components, each sorted, ordered by minimum vertex.
    pub fn components(&self) -> Vec<Vec<usize>> {
        let n = self.n();
        let mut seen = vec![false; n];
        let mut out = Vec::new();
        let mut queue = VecDeque::new();
        for s in 0..n {
            if seen[s] {
                continue;
            }
            seen[s] = true;
            queue.push_back(s);
            let mut comp = Vec::new();
            while let Some(v) = queue.pop_front() {
                comp.push(v);
                for &w in &self.adj[v] {
                    if !seen[w] {
                        seen[w] = true;
                        queue.push_back(w);
                    }
                }
            }
            comp.sort_unstable();
            out.push(comp);
        }
        out
    }

    /// Per-vertex component index into [`Graph::components`].
    pub fn component_ids(&self) -> (Vec<usize>, Vec<Vec<usize>>) {
        let comps = self.components();
        let mut id = vec![0; self.n()];
        for (c, comp) in comps.iter().enumerate() {
            for &v in comp {
                id[v] = c;
            }
        }
        (id, comps)
    }

    /// Disjoint union; vertices of `other` are shifted by `self.n()`.
    pub fn disjoint_union(&self, other: &Graph) -> Graph {
        let shift = self.n();
        let mut adj = self.adj.clone();
        adj.extend(
            other
                .adj
                .iter()
                .map(|list| list.iter().map(|&v| v + shift).collect()),
        );
        Graph {
            adj,
            degree_bound: self.degree_bound.max(other.degree_bound),
        }
    }

    /// Relabels vertex `v` to `perm[v]`.
    pub fn permuted(&self, perm: &[usize]) -> Graph {
        assert_eq!(perm.len(), self.n());
        let edges = self.edges().map(|(u, v)| (perm[u], perm[v]));
        Graph::from_edges(self.n(), self.degree_bound, edges).expect("permutation of a valid graph")
    }

    /// Subgraph induced on `vertices`, relabeled to `0..vertices.len()` in the given order.
    pub fn induced(&self, vertices: &[usize]) -> Graph {
        let mut local = vec![usize::MAX; self.n()];
        for (i, &v) in vertices.iter().enumerate() {
            local[v] = i;
        }
        let edges = vertices.iter().enumerate().flat_map(|(i, &v)| {
            let local = &local;
            self.adj[v]
                .iter()
                .filter_map(move |&w| (local[w] != usize::MAX && i < local[w]).then(|| (i, local[w])))
        });
        Graph::from_edges(vertices.len(), self.degree_bound, edges.collect::<Vec<_>>())
            .expect("induced subgraph of a valid graph")
    }

    /// Canonical edge-list text: header `n d`, then sorted `u v` lines.
    pub fn to_edge_list(&self) -> String {
        let mut out = String::new();
        writeln!(out, "{} {}", self.n(), self.degree_bound).unwrap();
        for (u, v) in self.edges() {
            writeln!(out, "{u} {v}").unwrap();
        }
        out
    }
}

/// Parses the edge-list format: a header line `n d` followed by `u v` lines.
///
/// `degree_bound` overrides nothing; when given it must agree with the header.
/// Blank lines and lines starting with `#` are skipped.
pub fn load_edge_list(text: &str, degree_bound: Option<usize>) -> Result<Graph, GraphError> {
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'));
    let (hline, header) = lines.next().ok_or(GraphError::ParseError {
        line: 1,
        msg: "missing header \"n d\"".into(),
    })?;
    let (n, d) = parse_pair(hline, header)?;
    if let Some(req) = degree_bound {
        if req != d {
            return Err(GraphError::DegreeBoundMismatch {
                header: d,
                requested: req,
            });
        }
    }
    let mut edges = Vec::new();
    for (line, l) in lines {
        edges.push(parse_pair(line, l)?);
    }
    Graph::from_edges(n, d, edges)
}

fn parse_pair(line: usize, l: &str) -> Result<(usize, usize), GraphError> {
    let mut it = l.split_whitespace();
    let mut next = || -> Result<usize, GraphError> {
        let tok = it.next().ok_or_else(|| GraphError::ParseError {
            line,
            msg: "expected two integers".into(),
        })?;
        tok.parse().map_err(|_| GraphError::ParseError {
            line,
            msg: format!("not a nonnegative integer: {tok:?}"),
        })
    };
    let a = next()?;
    let b = next()?;
    if it.next().is_some() {
        return Err(GraphError::ParseError {
            line,
            msg: "trailing tokens".into(),
        });
    }
    Ok((a, b))
}

/// A set of unordered edges, stored canonically with `u < v`.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash, Serialize)]
pub struct EdgeSet {
    edges: BTreeSet<Edge>,
}

impl EdgeSet {
    pub fn new() -> Self {
        Self::default()
    }

    /// Validates that every pair is an edge of `g`.
    pub fn from_pairs<I>(g: &Graph, pairs: I) -> Result<Self, GraphError>
    where
        I: IntoIterator<Item = (usize, usize)>,
    {
        let mut set = EdgeSet::new();
        for (u, v) in pairs {
            if !g.has_edge(u, v) {
                return Err(GraphError::UnknownEdge(u, v));
            }
            set.insert(u, v);
        }
        Ok(set)
    }

    pub fn insert(&mut self, u: usize, v: usize) -> bool {
        self.edges.insert(edge(u, v))
    }

    pub fn contains(&self, u: usize, v: usize) -> bool {
        self.edges.contains(&edge(u, v))
    }

    pub fn len(&self) -> usize {
        self.edges.len()
    }

    pub fn is_empty(&self) -> bool {
        self.edges.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = &Edge> {
        self.edges.iter()
    }

    pub fn extend(&mut self, other: &EdgeSet) {
        self.edges.extend(other.edges.iter().copied());
    }

    /// Vertices incident to at least one edge of the set, sorted.
    pub fn endpoints(&self) -> Vec<usize> {
        let set: BTreeSet<usize> = self.edges.iter().flat_map(|&(u, v)| [u, v]).collect();
        set.into_iter().collect()
    }
}

impl FromIterator<(usize, usize)> for EdgeSet {
    fn from_iter<T: IntoIterator<Item = (usize, usize)>>(iter: T) -> Self {
        EdgeSet {
            edges: iter.into_iter().map(|(u, v)| edge(u, v)).collect(),
        }
    }
}
