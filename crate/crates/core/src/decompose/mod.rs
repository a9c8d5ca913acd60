//! Staged decompositions derived from a feasible assignment.

mod dot;
mod kernel;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::graph::{ComputationalGraph, Edge, VertexId};
use crate::model::{build_model, Assignment, DiffConstraint, ModelError};

pub use dot::{render_dot, PALETTE};
pub use kernel::{emit_stage_kernels, read_kernels, KernelProgram, StageKernel};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum DecomposeError {
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error("assignment violates {} constraint(s), first: {}", .0.len(), .0[0])]
    InfeasibleAssignment(Vec<DiffConstraint>),
    #[error("no expression metadata for this graph; kernels need a traced graph")]
    MissingExprMetadata,
    #[error("kernel line {line}: {message}")]
    KernelParse { line: usize, message: String },
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Stage {
    pub k: u32,
    pub vertices: Vec<VertexId>,
    pub edges: Vec<Edge>,
    /// No incoming edge inside the stage.
    pub sources: Vec<VertexId>,
    /// No outgoing edge inside the stage.
    pub sinks: Vec<VertexId>,
    /// Created by an earlier stage (`c_i < k`).
    pub shared_in: Vec<VertexId>,
    /// Still needed by a later stage (`d_i > k`).
    pub shared_out: Vec<VertexId>,
}

impl Stage {
    /// Values the stage must hand on: everything still needed later, plus the
    /// graph sinks in the last stage.
    pub fn outputs(&self, graph: &ComputationalGraph, last: bool) -> Vec<VertexId> {
        if !last {
            return self.shared_out.clone();
        }
        let sinks = graph.sinks();
        self.vertices.iter().copied().filter(|v| sinks.contains(v)).collect()
    }
}

#[derive(Clone, Debug)]
pub struct Decomposition {
    pub graph: ComputationalGraph,
    pub assignment: Assignment,
    pub stages: Vec<Stage>,
}

impl Decomposition {
    pub fn stage_count(&self) -> u32 {
        self.stages.len() as u32
    }

    pub fn to_record(&self) -> DecompositionRecord {
        let a = &self.assignment;
        DecompositionRecord {
            k: self.stage_count(),
            assignment: (0..a.vertex_count())
                .map(|i| VertexLabels { id: i as u32, c: a.c[i], d: a.d[i], e: a.e[i] })
                .collect(),
            stages: self
                .stages
                .iter()
                .map(|s| StageRecord {
                    k: s.k,
                    vertices: s.vertices.iter().map(|v| v.0).collect(),
                    edges: s.edges.iter().map(|e| [e.src.0, e.dst.0]).collect(),
                    shared_out: s.shared_out.iter().map(|v| v.0).collect(),
                })
                .collect(),
        }
    }
}

/// Builds `V_k = {i : c_i <= k <= d_i}` and `E_k = {(i, j) : c_j = k}` for
/// `k = 1..=K`, after checking the assignment against every constraint.
pub fn decompose(graph: &ComputationalGraph, assignment: &Assignment) -> Result<Decomposition, DecomposeError> {
    let model = build_model(graph, 1)?;
    let violations = model.check_feasible(assignment)?;
    if !violations.is_empty() {
        return Err(DecomposeError::InfeasibleAssignment(violations));
    }
    let (c, d) = (&assignment.c, &assignment.d);
    let kmax = assignment.k;
    let mut stages = Vec::with_capacity(kmax.max(0) as usize);
    for k in 1..=kmax {
        let vertices: Vec<VertexId> =
            (0..graph.vertex_count()).filter(|&i| c[i] <= k && k <= d[i]).map(VertexId::from).collect();
        let edges: Vec<Edge> = graph.edges().iter().filter(|e| c[e.dst.index()] == k).copied().collect();
        let sources = vertices.iter().copied().filter(|v| !edges.iter().any(|e| e.dst == *v)).collect();
        let sinks = vertices.iter().copied().filter(|v| !edges.iter().any(|e| e.src == *v)).collect();
        let shared_in = vertices.iter().copied().filter(|v| c[v.index()] < k).collect();
        let shared_out = vertices.iter().copied().filter(|v| d[v.index()] > k).collect();
        stages.push(Stage { k: k as u32, vertices, edges, sources, sinks, shared_in, shared_out });
    }
    Ok(Decomposition { graph: graph.clone(), assignment: assignment.clone(), stages })
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct SharingEntry {
    pub vertex: VertexId,
    pub span: i64,
    pub weight: u32,
    pub contribution: i64,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct SharingReport {
    pub k: u32,
    pub entries: Vec<SharingEntry>,
    pub total: i64,
}

impl SharingReport {
    /// Vertices that live in more than one stage.
    pub fn shared(&self) -> impl Iterator<Item = &SharingEntry> {
        self.entries.iter().filter(|e| e.span > 0)
    }

    pub fn objective(&self, wk: u64) -> i64 {
        wk as i64 * i64::from(self.k) + self.total
    }
}

pub fn sharing_report(dec: &Decomposition) -> SharingReport {
    let a = &dec.assignment;
    let entries: Vec<SharingEntry> = dec
        .graph
        .vertices()
        .iter()
        .map(|v| {
            let span = a.d[v.id.index()] - a.c[v.id.index()];
            SharingEntry { vertex: v.id, span, weight: v.weight, contribution: span * i64::from(v.weight) }
        })
        .collect();
    let total = entries.iter().map(|e| e.contribution).sum();
    SharingReport { k: dec.stage_count(), entries, total }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VertexLabels {
    pub id: u32,
    pub c: i64,
    pub d: i64,
    pub e: i64,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StageRecord {
    pub k: u32,
    pub vertices: Vec<u32>,
    pub edges: Vec<[u32; 2]>,
    pub shared_out: Vec<u32>,
}

/// Serialized decomposition, the input of the verifier.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DecompositionRecord {
    #[serde(rename = "K")]
    pub k: u32,
    pub assignment: Vec<VertexLabels>,
    pub stages: Vec<StageRecord>,
}

impl DecompositionRecord {
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("record serializes");
        s.push('\n');
        s
    }

    pub fn from_json(text: &str) -> Result<Self, serde_json::Error> {
        serde_json::from_str(text)
    }

    /// The labels as an [`Assignment`], or `None` unless the ids are exactly
    /// `0..n` in order.
    pub fn labels(&self) -> Option<Assignment> {
        if self.assignment.iter().enumerate().any(|(i, l)| l.id as usize != i) {
            return None;
        }
        Some(Assignment {
            k: i64::from(self.k),
            c: self.assignment.iter().map(|l| l.c).collect(),
            d: self.assignment.iter().map(|l| l.d).collect(),
            e: self.assignment.iter().map(|l| l.e).collect(),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::Family;

    fn chain() -> ComputationalGraph {
        ComputationalGraph::from_edges(3, &[(0, 1, true), (1, 2, true)]).unwrap()
    }

    fn chain_optimum() -> Assignment {
        Assignment { k: 2, c: vec![1, 1, 2], d: vec![1, 2, 2], e: vec![1, 2, 3] }
    }

    #[test]
    fn stages_follow_the_labels() {
        let dec = decompose(&chain(), &chain_optimum()).unwrap();
        assert_eq!(dec.stage_count(), 2);
        let [s1, s2] = &dec.stages[..] else { panic!() };
        assert_eq!(s1.vertices, vec![VertexId(0), VertexId(1)]);
        assert_eq!(s2.vertices, vec![VertexId(1), VertexId(2)]);
        assert_eq!(s1.edges.len() + s2.edges.len(), 2);
        assert_eq!(s1.shared_out, vec![VertexId(1)]);
        assert_eq!(s2.sources, s1.shared_out);
        assert_eq!(s2.shared_in, vec![VertexId(1)]);
        assert_eq!(s1.sinks, vec![VertexId(1)]);
    }

    #[test]
    fn sharing_totals() {
        let dec = decompose(&chain(), &chain_optimum()).unwrap();
        let r = sharing_report(&dec);
        assert_eq!(r.total, 1);
        assert_eq!(r.shared().count(), 1);
        assert_eq!(r.objective(1), 3);
    }

    #[test]
    fn single_stage() {
        let g = ComputationalGraph::from_edges(3, &[(0, 1, false), (1, 2, false)]).unwrap();
        let a = Assignment { k: 1, c: vec![1; 3], d: vec![1; 3], e: vec![1; 3] };
        let dec = decompose(&g, &a).unwrap();
        assert_eq!(dec.stages.len(), 1);
        assert_eq!(dec.stages[0].edges.len(), 2);
        assert_eq!(sharing_report(&dec).total, 0);
    }

    #[test]
    fn infeasible_assignment_is_rejected() {
        let a = Assignment { k: 1, c: vec![1; 3], d: vec![1; 3], e: vec![1, 2, 3] };
        match decompose(&chain(), &a) {
            Err(DecomposeError::InfeasibleAssignment(v)) => {
                assert!(v.iter().any(|c| c.family == Family::EffectiveWindow))
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn record_round_trip() {
        let rec = decompose(&chain(), &chain_optimum()).unwrap().to_record();
        let text = rec.to_json();
        assert!(text.contains("\"K\": 2"));
        assert_eq!(DecompositionRecord::from_json(&text).unwrap(), rec);
        assert_eq!(rec.labels(), Some(chain_optimum()));
        let mut shuffled = rec;
        shuffled.assignment.swap(0, 1);
        assert_eq!(shuffled.labels(), None);
    }
}
