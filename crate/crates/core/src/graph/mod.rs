//! Weighted computational graphs with swept edges.
//!
//! A vertex is one intermediate value of an update formula, held at every grid
//! point. An edge `(i, j)` means value `j` is computed directly from value `i`;
//! it is *swept* when `j` at a grid point reads `i` at a neighbouring grid
//! point.

mod json;

use std::cmp::Reverse;
use std::collections::{BTreeSet, BinaryHeap, HashSet};
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use json::{read_graph_json, write_graph_json};

/// Dense vertex index, `0..|V|`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct VertexId(pub u32);

impl VertexId {
    #[inline]
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

impl From<usize> for VertexId {
    fn from(i: usize) -> Self {
        VertexId(u32::try_from(i).expect("vertex index exceeds u32"))
    }
}

impl fmt::Display for VertexId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Vertex {
    pub id: VertexId,
    /// Storage units per grid point. Always at least 1.
    pub weight: u32,
    pub label: Option<String>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Edge {
    pub src: VertexId,
    pub dst: VertexId,
    pub swept: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GraphError {
    #[error("graph has no vertices")]
    EmptyGraph,
    #[error("cycle found through vertices {0:?}")]
    CycleFound(Vec<VertexId>),
    #[error("duplicate edge ({0}, {1})")]
    DuplicateEdge(VertexId, VertexId),
    #[error("self-loop on vertex {0}")]
    SelfLoop(VertexId),
    #[error("edge ({0}, {1}) references an unknown vertex")]
    UnknownVertex(VertexId, VertexId),
    #[error("vertex at position {position} has id {id}; ids must be dense and ordered")]
    NonDenseId { position: usize, id: VertexId },
    #[error("vertex {0} has weight 0; weight must be >= 1")]
    ZeroWeight(VertexId),
    #[error("parse error at line {line}: {message}")]
    ParseError { line: usize, message: String },
    #[error("schema error: {0}")]
    SchemaError(String),
}

/// A DAG of values with a distinguished subset of swept edges.
///
/// Construction checks the structural invariants (dense ids, weights, edge
/// endpoints). Acyclicity, self-loops and duplicate edges are checked by
/// [`ComputationalGraph::validate`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ComputationalGraph {
    vertices: Vec<Vertex>,
    edges: Vec<Edge>,
}

/// Outcome of a successful [`ComputationalGraph::validate`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ValidationReport {
    pub sources: Vec<VertexId>,
    pub sinks: Vec<VertexId>,
    /// Vertices with neither incoming nor outgoing edges.
    pub isolated: Vec<VertexId>,
    pub swept_edges: usize,
}

impl ComputationalGraph {
    pub fn new(vertices: Vec<Vertex>, edges: Vec<Edge>) -> Result<Self, GraphError> {
        for (position, v) in vertices.iter().enumerate() {
            if v.id.index() != position {
                return Err(GraphError::NonDenseId { position, id: v.id });
            }
            if v.weight == 0 {
                return Err(GraphError::ZeroWeight(v.id));
            }
        }
        let n = vertices.len();
        for e in &edges {
            if e.src.index() >= n || e.dst.index() >= n {
                return Err(GraphError::UnknownVertex(e.src, e.dst));
            }
        }
        Ok(Self { vertices, edges })
    }

    /// Unit-weight, unlabelled graph from `(src, dst, swept)` triples.
    pub fn from_edges(n: usize, edges: &[(u32, u32, bool)]) -> Result<Self, GraphError> {
        Self::with_weights(&vec![1; n], edges)
    }

    pub fn with_weights(weights: &[u32], edges: &[(u32, u32, bool)]) -> Result<Self, GraphError> {
        let vertices = weights
            .iter()
            .enumerate()
            .map(|(i, &weight)| Vertex { id: VertexId::from(i), weight, label: None })
            .collect();
        let edges = edges.iter().map(|&(s, d, swept)| Edge { src: VertexId(s), dst: VertexId(d), swept }).collect();
        Self::new(vertices, edges)
    }

    pub fn vertices(&self) -> &[Vertex] {
        &self.vertices
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn vertex_count(&self) -> usize {
        self.vertices.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn swept_edge_count(&self) -> usize {
        self.edges.iter().filter(|e| e.swept).count()
    }

    pub fn weight(&self, v: VertexId) -> u32 {
        self.vertices[v.index()].weight
    }

    /// Outgoing edge indices per vertex.
    pub fn out_edges(&self) -> Vec<Vec<usize>> {
        let mut out = vec![Vec::new(); self.vertices.len()];
        for (k, e) in self.edges.iter().enumerate() {
            out[e.src.index()].push(k);
        }
        out
    }

    /// Incoming edge indices per vertex.
    pub fn in_edges(&self) -> Vec<Vec<usize>> {
        let mut inc = vec![Vec::new(); self.vertices.len()];
        for (k, e) in self.edges.iter().enumerate() {
            inc[e.dst.index()].push(k);
        }
        inc
    }

    pub fn sources(&self) -> Vec<VertexId> {
        let mut has_in = vec![false; self.vertices.len()];
        for e in &self.edges {
            has_in[e.dst.index()] = true;
        }
        ids_where(&has_in, false)
    }

    pub fn sinks(&self) -> Vec<VertexId> {
        let mut has_out = vec![false; self.vertices.len()];
        for e in &self.edges {
            has_out[e.src.index()] = true;
        }
        ids_where(&has_out, false)
    }

    /// Vertices that are the target of at least one swept edge.
    pub fn swept_targets(&self) -> Vec<bool> {
        let mut t = vec![false; self.vertices.len()];
        for e in self.edges.iter().filter(|e| e.swept) {
            t[e.dst.index()] = true;
        }
        t
    }

    pub fn validate(&self) -> Result<ValidationReport, GraphError> {
        if self.vertices.is_empty() {
            return Err(GraphError::EmptyGraph);
        }
        let mut seen = HashSet::with_capacity(self.edges.len());
        for e in &self.edges {
            if e.src == e.dst {
                return Err(GraphError::SelfLoop(e.src));
            }
            if !seen.insert((e.src, e.dst)) {
                return Err(GraphError::DuplicateEdge(e.src, e.dst));
            }
        }
        self.topological_order()?;

        let sources = self.sources();
        let sinks = self.sinks();
        let sink_set: BTreeSet<_> = sinks.iter().copied().collect();
        let isolated = sources.iter().copied().filter(|v| sink_set.contains(v)).collect();
        Ok(ValidationReport { sources, sinks, isolated, swept_edges: self.swept_edge_count() })
    }

    /// Kahn's algorithm; among ready vertices the smallest id goes first.
    pub fn topological_order(&self) -> Result<Vec<VertexId>, GraphError> {
        let n = self.vertices.len();
        let out = self.out_edges();
        let mut indegree = vec![0usize; n];
        for e in &self.edges {
            indegree[e.dst.index()] += 1;
        }
        let mut ready: BinaryHeap<Reverse<u32>> =
            (0..n).filter(|&i| indegree[i] == 0).map(|i| Reverse(i as u32)).collect();
        let mut order = Vec::with_capacity(n);
        while let Some(Reverse(v)) = ready.pop() {
            order.push(VertexId(v));
            for &k in &out[v as usize] {
                let d = self.edges[k].dst.index();
                indegree[d] -= 1;
                if indegree[d] == 0 {
                    ready.push(Reverse(d as u32));
                }
            }
        }
        if order.len() < n {
            return Err(GraphError::CycleFound(self.find_cycle(&indegree)));
        }
        Ok(order)
    }

    /// Recovers one cycle among the vertices Kahn's algorithm could not emit.
    fn find_cycle(&self, indegree: &[usize]) -> Vec<VertexId> {
        let n = self.vertices.len();
        let stuck: Vec<bool> = indegree.iter().map(|&d| d > 0).collect();
        let mut pred = vec![usize::MAX; n];
        for e in &self.edges {
            if stuck[e.src.index()] && stuck[e.dst.index()] {
                let d = e.dst.index();
                if pred[d] == usize::MAX || e.src.index() < pred[d] {
                    pred[d] = e.src.index();
                }
            }
        }
        // Every stuck vertex has a stuck predecessor, so walking backwards must revisit.
        let start = stuck.iter().position(|&s| s).expect("cycle exists");
        let mut mark = vec![false; n];
        let mut v = start;
        while !mark[v] {
            mark[v] = true;
            v = pred[v];
        }
        let mut cycle = vec![VertexId::from(v)];
        let mut u = pred[v];
        while u != v {
            cycle.push(VertexId::from(u));
            u = pred[u];
        }
        cycle.reverse();
        let min_pos = cycle.iter().enumerate().min_by_key(|(_, id)| **id).map(|(i, _)| i).unwrap_or(0);
        cycle.rotate_left(min_pos);
        cycle
    }

    /// Per-vertex swept labels: 0 for vertices with no incoming edge, otherwise
    /// the max over predecessors of `label(pred) + [edge swept]`.
    ///
    /// The label of `j` equals the largest number of swept edges on any path
    /// ending at `j`.
    pub fn swept_labels(&self) -> Result<Vec<u32>, GraphError> {
        let order = self.topological_order()?;
        let inc = self.in_edges();
        let mut label = vec![0u32; self.vertices.len()];
        for v in order {
            label[v.index()] = inc[v.index()]
                .iter()
                .map(|&k| {
                    let e = &self.edges[k];
                    label[e.src.index()] + u32::from(e.swept)
                })
                .max()
                .unwrap_or(0);
        }
        Ok(label)
    }

    /// Maximum number of swept edges on any directed path; a lower bound on
    /// the number of atomic stages.
    pub fn swept_depth(&self) -> Result<u32, GraphError> {
        let labels = self.swept_labels()?;
        Ok(self.sinks().iter().map(|s| labels[s.index()]).max().unwrap_or(0))
    }
}

fn ids_where(flags: &[bool], value: bool) -> Vec<VertexId> {
    flags.iter().enumerate().filter(|(_, &f)| f == value).map(|(i, _)| VertexId::from(i)).collect()
}
