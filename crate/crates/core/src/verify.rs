//! Checks a decomposition record against the three stage criteria without
//! trusting its labels: stage structure is re-derived from the stage lists.

use std::collections::{HashMap, HashSet};

use serde::Serialize;

use crate::decompose::{DecompositionRecord, Stage};
use crate::graph::{ComputationalGraph, Edge, GraphError, VertexId};

/// Per-vertex swept-path labels of one stage subgraph.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct StageLabels {
    pub labels: Vec<(VertexId, u32)>,
    /// Predecessor realizing each label, for witness paths.
    back: HashMap<VertexId, VertexId>,
}

impl StageLabels {
    pub fn max(&self) -> u32 {
        self.labels.iter().map(|&(_, s)| s).max().unwrap_or(0)
    }

    pub fn is_atomic(&self) -> bool {
        self.max() <= 1
    }

    pub fn label(&self, v: VertexId) -> Option<u32> {
        self.labels.iter().find(|(u, _)| *u == v).map(|&(_, s)| s)
    }

    /// A path ending at a vertex of maximal label.
    pub fn heaviest_path(&self) -> Vec<VertexId> {
        let Some(&(mut v, _)) = self.labels.iter().max_by_key(|&&(u, s)| (s, std::cmp::Reverse(u))) else {
            return Vec::new();
        };
        let mut path = vec![v];
        while let Some(&p) = self.back.get(&v) {
            path.push(p);
            v = p;
        }
        path.reverse();
        path
    }
}

/// Labels `s_j = max over (i, j) of s_i + [swept]`, 0 for vertices with no
/// incoming edge, over the subgraph induced by `vertices` and `edges`.
pub fn atomic_labels(vertices: &[VertexId], edges: &[Edge]) -> Result<StageLabels, GraphError> {
    let pos: HashMap<VertexId, usize> = vertices.iter().enumerate().map(|(i, v)| (*v, i)).collect();
    let n = vertices.len();
    let mut indeg = vec![0usize; n];
    let mut out: Vec<Vec<(usize, bool)>> = vec![Vec::new(); n];
    for e in edges {
        let (Some(&a), Some(&b)) = (pos.get(&e.src), pos.get(&e.dst)) else {
            return Err(GraphError::UnknownVertex(e.src, e.dst));
        };
        out[a].push((b, e.swept));
        indeg[b] += 1;
    }
    let mut label = vec![0u32; n];
    let mut back = HashMap::new();
    let mut ready: Vec<usize> = (0..n).filter(|&i| indeg[i] == 0).collect();
    let mut seen = 0;
    while let Some(a) = ready.pop() {
        seen += 1;
        for &(b, swept) in &out[a] {
            let cand = label[a] + u32::from(swept);
            if cand > label[b] || (cand == label[b] && !back.contains_key(&vertices[b])) {
                label[b] = cand;
                back.insert(vertices[b], vertices[a]);
            }
            indeg[b] -= 1;
            if indeg[b] == 0 {
                ready.push(b);
            }
        }
    }
    if seen < n {
        let cyc: Vec<VertexId> = (0..n).filter(|&i| indeg[i] > 0).map(|i| vertices[i]).collect();
        return Err(GraphError::CycleFound(cyc));
    }
    Ok(StageLabels { labels: vertices.iter().copied().zip(label).collect(), back })
}

pub fn stage_labels(stage: &Stage) -> Result<StageLabels, GraphError> {
    atomic_labels(&stage.vertices, &stage.edges)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Witness {
    EdgeInSeveralStages { edge: [u32; 2], stages: Vec<u32> },
    EdgeInNoStage { edge: [u32; 2] },
    UnknownEdge { stage: u32, edge: [u32; 2] },
    EdgeOutsideStage { stage: u32, edge: [u32; 2] },
    IncomingEdgesSplit { vertex: u32, stages: Vec<u32> },
    VertexInNoStage { vertex: u32 },
    StageNumbering { expected: u32, found: u32 },
    OrphanedSource { stage: u32, vertex: u32 },
    FirstStageSources { expected: Vec<u32>, found: Vec<u32> },
    SinkNotInLastStage { vertex: u32 },
    NonAtomicStage { stage: u32, path: Vec<u32>, label: u32 },
    CyclicStage { stage: u32 },
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct CriterionResult {
    pub pass: bool,
    pub witness: Option<Witness>,
}

impl CriterionResult {
    fn from(witness: Option<Witness>) -> Self {
        CriterionResult { pass: witness.is_none(), witness }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct VerificationReport {
    pub criterion1: CriterionResult,
    pub criterion2: CriterionResult,
    pub criterion3: CriterionResult,
    pub overall: bool,
}

impl VerificationReport {
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }
}

fn key(e: &Edge) -> [u32; 2] {
    [e.src.0, e.dst.0]
}

/// Criterion 1: every edge lies in exactly one stage, stage edges are graph
/// edges between stage vertices, and all edges into a vertex share a stage.
fn edge_partition(graph: &ComputationalGraph, rec: &DecompositionRecord) -> Option<Witness> {
    let graph_edges: HashSet<[u32; 2]> = graph.edges().iter().map(key).collect();
    let mut owner: HashMap<[u32; 2], Vec<u32>> = HashMap::new();
    for s in &rec.stages {
        let verts: HashSet<u32> = s.vertices.iter().copied().collect();
        for &e in &s.edges {
            if !graph_edges.contains(&e) {
                return Some(Witness::UnknownEdge { stage: s.k, edge: e });
            }
            if !verts.contains(&e[0]) || !verts.contains(&e[1]) {
                return Some(Witness::EdgeOutsideStage { stage: s.k, edge: e });
            }
            owner.entry(e).or_default().push(s.k);
        }
    }
    for e in graph.edges() {
        match owner.get(&key(e)) {
            None => return Some(Witness::EdgeInNoStage { edge: key(e) }),
            Some(st) if st.len() > 1 => return Some(Witness::EdgeInSeveralStages { edge: key(e), stages: st.clone() }),
            _ => {}
        }
    }
    let mut into: Vec<Vec<u32>> = vec![Vec::new(); graph.vertex_count()];
    for e in graph.edges() {
        let st = owner[&key(e)][0];
        let list = &mut into[e.dst.index()];
        if !list.contains(&st) {
            list.push(st);
        }
    }
    if let Some((v, st)) = into.iter().enumerate().find(|(_, st)| st.len() > 1) {
        return Some(Witness::IncomingEdgesSplit { vertex: v as u32, stages: st.clone() });
    }
    let covered: HashSet<u32> = rec.stages.iter().flat_map(|s| s.vertices.iter().copied()).collect();
    (0..graph.vertex_count() as u32).find(|v| !covered.contains(v)).map(|vertex| Witness::VertexInNoStage { vertex })
}

fn stage_sources(s: &crate::decompose::StageRecord) -> Vec<u32> {
    let targets: HashSet<u32> = s.edges.iter().map(|e| e[1]).collect();
    let mut v: Vec<u32> = s.vertices.iter().copied().filter(|v| !targets.contains(v)).collect();
    v.sort_unstable();
    v
}

/// Criterion 2: stage k+1 only starts from values stage k holds, stage 1
/// starts from exactly the graph sources, and the graph sinks are in the
/// last stage.
fn chaining(graph: &ComputationalGraph, rec: &DecompositionRecord) -> Option<Witness> {
    for (i, s) in rec.stages.iter().enumerate() {
        if s.k != i as u32 + 1 {
            return Some(Witness::StageNumbering { expected: i as u32 + 1, found: s.k });
        }
    }
    if rec.k as usize != rec.stages.len() {
        return Some(Witness::StageNumbering { expected: rec.stages.len() as u32, found: rec.k });
    }
    let Some(first) = rec.stages.first() else {
        return Some(Witness::StageNumbering { expected: 1, found: 0 });
    };
    let mut expected: Vec<u32> = graph.sources().iter().map(|v| v.0).collect();
    expected.sort_unstable();
    let found = stage_sources(first);
    if found != expected {
        return Some(Witness::FirstStageSources { expected, found });
    }
    for pair in rec.stages.windows(2) {
        let prev: HashSet<u32> = pair[0].vertices.iter().copied().collect();
        if let Some(v) = stage_sources(&pair[1]).into_iter().find(|v| !prev.contains(v)) {
            return Some(Witness::OrphanedSource { stage: pair[1].k, vertex: v });
        }
    }
    let last: HashSet<u32> = rec.stages.last().map(|s| s.vertices.iter().copied().collect()).unwrap_or_default();
    graph.sinks().into_iter().find(|v| !last.contains(&v.0)).map(|v| Witness::SinkNotInLastStage { vertex: v.0 })
}

/// Criterion 3: no path inside a stage crosses two swept edges.
fn atomicity(graph: &ComputationalGraph, rec: &DecompositionRecord) -> Option<Witness> {
    let swept: HashSet<[u32; 2]> = graph.edges().iter().filter(|e| e.swept).map(key).collect();
    for s in &rec.stages {
        let vertices: Vec<VertexId> = s.vertices.iter().map(|&v| VertexId(v)).collect();
        let edges: Vec<Edge> = s
            .edges
            .iter()
            .map(|&e| Edge { src: VertexId(e[0]), dst: VertexId(e[1]), swept: swept.contains(&e) })
            .collect();
        match atomic_labels(&vertices, &edges) {
            Ok(l) if !l.is_atomic() => {
                return Some(Witness::NonAtomicStage {
                    stage: s.k,
                    path: l.heaviest_path().iter().map(|v| v.0).collect(),
                    label: l.max(),
                })
            }
            Ok(_) => {}
            Err(_) => return Some(Witness::CyclicStage { stage: s.k }),
        }
    }
    None
}

pub fn verify(graph: &ComputationalGraph, rec: &DecompositionRecord) -> VerificationReport {
    let criterion1 = CriterionResult::from(edge_partition(graph, rec));
    let criterion2 = CriterionResult::from(chaining(graph, rec));
    let criterion3 = CriterionResult::from(atomicity(graph, rec));
    let overall = criterion1.pass && criterion2.pass && criterion3.pass;
    VerificationReport { criterion1, criterion2, criterion3, overall }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::decompose::decompose;
    use crate::model::Assignment;

    fn e(a: u32, b: u32, swept: bool) -> Edge {
        Edge { src: VertexId(a), dst: VertexId(b), swept }
    }

    fn ids(n: u32) -> Vec<VertexId> {
        (0..n).map(VertexId).collect()
    }

    #[test]
    fn labels() {
        let l = atomic_labels(&ids(2), &[e(0, 1, true)]).unwrap();
        assert_eq!(l.labels, vec![(VertexId(0), 0), (VertexId(1), 1)]);
        let l = atomic_labels(&ids(3), &[e(0, 2, true), e(1, 2, true)]).unwrap();
        assert_eq!(l.labels.iter().map(|x| x.1).collect::<Vec<_>>(), vec![0, 0, 1]);
        assert!(l.is_atomic());
        let l = atomic_labels(&ids(3), &[e(0, 1, true), e(1, 2, true)]).unwrap();
        assert_eq!(l.max(), 2);
        assert_eq!(l.heaviest_path(), ids(3));
        assert!(matches!(atomic_labels(&ids(2), &[e(0, 1, false), e(1, 0, false)]), Err(GraphError::CycleFound(_))));
    }

    fn chain_record() -> (ComputationalGraph, DecompositionRecord) {
        let g = ComputationalGraph::from_edges(3, &[(0, 1, true), (1, 2, true)]).unwrap();
        let a = Assignment { k: 2, c: vec![1, 1, 2], d: vec![1, 2, 2], e: vec![1, 2, 3] };
        let rec = decompose(&g, &a).unwrap().to_record();
        (g, rec)
    }

    #[test]
    fn valid_decomposition_passes() {
        let (g, rec) = chain_record();
        let r = verify(&g, &rec);
        assert!(r.overall, "{r:?}");
    }

    #[test]
    fn duplicated_edge() {
        let (g, mut rec) = chain_record();
        rec.stages[1].vertices.insert(0, 0);
        rec.stages[1].edges.push([0, 1]);
        let r = verify(&g, &rec);
        assert_eq!(r.criterion1.witness, Some(Witness::EdgeInSeveralStages { edge: [0, 1], stages: vec![1, 2] }));
        assert!(!r.overall);
    }

    #[test]
    fn single_stage_with_two_swept_edges() {
        let (g, _) = chain_record();
        let rec = DecompositionRecord {
            k: 1,
            assignment: vec![],
            stages: vec![crate::decompose::StageRecord {
                k: 1,
                vertices: vec![0, 1, 2],
                edges: vec![[0, 1], [1, 2]],
                shared_out: vec![],
            }],
        };
        let r = verify(&g, &rec);
        assert!(r.criterion1.pass && r.criterion2.pass);
        assert_eq!(r.criterion3.witness, Some(Witness::NonAtomicStage { stage: 1, path: vec![0, 1, 2], label: 2 }));
    }

    #[test]
    fn orphaned_source() {
        let (g, mut rec) = chain_record();
        let stage = |k, vertices: Vec<u32>, edges: Vec<[u32; 2]>| crate::decompose::StageRecord {
            k,
            vertices,
            edges,
            shared_out: vec![],
        };
        rec.k = 3;
        rec.stages =
            vec![stage(1, vec![0, 1], vec![[0, 1]]), stage(2, vec![0], vec![]), stage(3, vec![1, 2], vec![[1, 2]])];
        let r = verify(&g, &rec);
        assert!(r.criterion1.pass);
        assert_eq!(r.criterion2.witness, Some(Witness::OrphanedSource { stage: 3, vertex: 1 }));
    }
}
