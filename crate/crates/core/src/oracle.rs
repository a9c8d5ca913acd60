//! Independent reference answers for small graphs: exhaustive optimal
//! decomposition, path enumeration, and a seeded random DAG generator.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::graph::{ComputationalGraph, GraphError, VertexId};
use crate::model::Assignment;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum OracleError {
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error("{vertices} vertices exceeds the oracle limit of {limit}")]
    TooLarge { vertices: usize, limit: usize },
    #[error("no feasible decomposition with K <= {0}")]
    Infeasible(u32),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct OracleLimits {
    pub max_vertices: usize,
    /// Upper end of the K sweep. `None` derives a bound that provably
    /// contains the optimum.
    pub max_k: Option<u32>,
}

impl Default for OracleLimits {
    fn default() -> Self {
        OracleLimits { max_vertices: 8, max_k: None }
    }
}

struct Search<'g> {
    wk: i64,
    k: i64,
    order: Vec<usize>,
    preds: Vec<Vec<(usize, bool)>>,
    succs: Vec<Vec<usize>>,
    weight: Vec<i64>,
    is_source: Vec<bool>,
    is_sink: Vec<bool>,
    swept_target: Vec<bool>,
    graph: &'g ComputationalGraph,
    c: Vec<i64>,
    e_min: Vec<i64>,
    assigned: Vec<bool>,
    best: Option<(i64, Assignment)>,
}

impl Search<'_> {
    fn bound(&self) -> i64 {
        let mut total = self.wk * self.k;
        for i in 0..self.c.len() {
            if !self.assigned[i] {
                continue;
            }
            let mut d = self.c[i];
            if self.is_sink[i] {
                d = self.k;
            }
            for &j in &self.succs[i] {
                if self.assigned[j] {
                    d = d.max(self.c[j]);
                }
            }
            total += self.weight[i] * (d - self.c[i]);
        }
        total
    }

    fn recurse(&mut self, t: usize) {
        if t == self.order.len() {
            self.complete();
            return;
        }
        let i = self.order[t];
        let lo = self.preds[i].iter().map(|&(p, _)| self.c[p]).max().unwrap_or(1);
        let (lo, hi) = if self.is_source[i] { (1, 1) } else { (lo, self.k) };
        for x in lo..=hi {
            // smallest e_i the plain, swept and window constraints allow
            let mut e = x + i64::from(self.swept_target[i]);
            for &(p, swept) in &self.preds[i] {
                e = e.max(self.e_min[p] + i64::from(swept));
            }
            if e > x + 1 {
                continue;
            }
            self.c[i] = x;
            self.e_min[i] = e;
            self.assigned[i] = true;
            if self.best.as_ref().is_none_or(|(b, _)| self.bound() < *b) {
                self.recurse(t + 1);
            }
            self.assigned[i] = false;
        }
    }

    fn complete(&mut self) {
        let n = self.c.len();
        let d: Vec<i64> = (0..n)
            .map(|i| {
                let mut d = self.c[i];
                if self.is_sink[i] {
                    d = self.k;
                }
                self.succs[i].iter().fold(d, |d, &j| d.max(self.c[j]))
            })
            .collect();
        let obj = self.wk * self.k + (0..n).map(|i| self.weight[i] * (d[i] - self.c[i])).sum::<i64>();
        if self.best.as_ref().is_some_and(|(b, _)| obj >= *b) {
            return;
        }
        if let Some(e) = effective_labels(self.graph, &self.c, &self.swept_target) {
            self.best = Some((obj, Assignment { k: self.k, c: self.c.clone(), d, e }));
        }
    }
}

/// Solves the e-part of the constraint system for fixed c by Bellman-Ford
/// over the difference-constraint graph. Returns `None` on a negative cycle.
fn effective_labels(graph: &ComputationalGraph, c: &[i64], swept_target: &[bool]) -> Option<Vec<i64>> {
    let n = c.len();
    let z = n;
    // (from, to, w) encodes x_to - x_from <= w
    let mut arcs: Vec<(usize, usize, i64)> = Vec::new();
    for i in 0..n {
        arcs.push((z, i, c[i] + 1));
        arcs.push((i, z, -c[i] - i64::from(swept_target[i])));
    }
    for e in graph.edges() {
        arcs.push((e.dst.index(), e.src.index(), if e.swept { -1 } else { 0 }));
    }
    let mut dist = vec![0i64; n + 1];
    for round in 0..=n + 1 {
        let mut changed = false;
        for &(a, b, w) in &arcs {
            if dist[a] + w < dist[b] {
                dist[b] = dist[a] + w;
                changed = true;
            }
        }
        if !changed {
            return Some((0..n).map(|i| dist[i] - dist[z]).collect());
        }
        if round == n + 1 {
            break;
        }
    }
    None
}

/// Exhaustive minimum of the decomposition objective.
///
/// Stage indices are enumerated vertex by vertex in topological order with
/// edge monotonicity and source pinning enforced up front; each `d_i` is
/// the smallest value the edge and sink constraints allow, and a complete
/// labelling is accepted only if the e-constraints are feasible.
///
/// Any source-to-sink path forces sharing of at least `K - 1`, so an
/// incumbent of value `UB` limits the sweep to `K <= (UB + 1) / (W_K + 1)`.
pub fn brute_force_optimum(
    graph: &ComputationalGraph,
    wk: u64,
    limits: OracleLimits,
) -> Result<(i64, Assignment), OracleError> {
    let report = graph.validate()?;
    let n = graph.vertex_count();
    if n > limits.max_vertices {
        return Err(OracleError::TooLarge { vertices: n, limit: limits.max_vertices });
    }
    let depth = graph.swept_depth()?.max(1);
    let wk = i64::try_from(wk).expect("W_K fits i64");

    let mut preds = vec![Vec::new(); n];
    let mut succs = vec![Vec::new(); n];
    for e in graph.edges() {
        preds[e.dst.index()].push((e.src.index(), e.swept));
        succs[e.src.index()].push(e.dst.index());
    }
    let mut is_source = vec![false; n];
    let mut is_sink = vec![false; n];
    report.sources.iter().for_each(|v| is_source[v.index()] = true);
    report.sinks.iter().for_each(|v| is_sink[v.index()] = true);

    let mut search = Search {
        wk,
        k: 0,
        order: graph.topological_order()?.into_iter().map(VertexId::index).collect(),
        preds,
        succs,
        weight: graph.vertices().iter().map(|v| i64::from(v.weight)).collect(),
        is_source,
        is_sink,
        swept_target: graph.swept_targets(),
        graph,
        c: vec![0; n],
        e_min: vec![0; n],
        assigned: vec![false; n],
        best: None,
    };
    let mut k = i64::from(depth);
    loop {
        let ceiling = match (&search.best, limits.max_k) {
            (_, Some(m)) if k > i64::from(m) => break,
            (Some((ub, _)), _) => (ub + 1) / (wk + 1),
            (None, _) => i64::MAX,
        };
        if k > ceiling {
            break;
        }
        search.k = k;
        search.recurse(0);
        if search.best.is_none() && limits.max_k.is_none() && k > i64::from(depth) + n as i64 {
            break;
        }
        k += 1;
    }
    search.best.ok_or(OracleError::Infeasible(limits.max_k.unwrap_or(depth)))
}

/// Largest number of swept edges on any path, by listing every path.
pub fn path_max_swept(graph: &ComputationalGraph) -> u32 {
    let out = graph.out_edges();
    let edges = graph.edges();
    fn walk(v: usize, out: &[Vec<usize>], edges: &[crate::graph::Edge]) -> u32 {
        out[v].iter().map(|&ei| u32::from(edges[ei].swept) + walk(edges[ei].dst.index(), out, edges)).max().unwrap_or(0)
    }
    (0..graph.vertex_count()).map(|v| walk(v, &out, edges)).max().unwrap_or(0)
}

/// Seeded random DAG with edges pointing from lower to higher ids and
/// weights in 1..=4. A draw with no edges falls back to a chain.
pub fn random_graph(seed: u64, n: usize, edge_prob: f64, swept_prob: f64) -> ComputationalGraph {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let weights: Vec<u32> = (0..n).map(|_| rng.gen_range(1..=4)).collect();
    let mut edges = Vec::new();
    for i in 0..n {
        for j in i + 1..n {
            if rng.gen_bool(edge_prob) {
                edges.push((i as u32, j as u32, rng.gen_bool(swept_prob)));
            }
        }
    }
    if edges.is_empty() {
        edges = (1..n).map(|j| ((j - 1) as u32, j as u32, rng.gen_bool(swept_prob))).collect();
    }
    ComputationalGraph::with_weights(&weights, &edges).expect("forward edges form a DAG")
}

#[cfg(test)]
mod tests {
    use super::*;

    fn opt(g: &ComputationalGraph, wk: u64) -> i64 {
        brute_force_optimum(g, wk, OracleLimits { max_vertices: 16, max_k: None }).unwrap().0
    }

    #[test]
    fn single_swept_edge() {
        let g = ComputationalGraph::from_edges(2, &[(0, 1, true)]).unwrap();
        let (obj, a) = brute_force_optimum(&g, 1, OracleLimits::default()).unwrap();
        assert_eq!(obj, 1);
        assert_eq!(a.k, 1);
        assert_eq!(a.e[1] - a.e[0], 1);
    }

    #[test]
    fn double_swept_chain() {
        let g = ComputationalGraph::from_edges(3, &[(0, 1, true), (1, 2, true)]).unwrap();
        let (obj, a) = brute_force_optimum(&g, 1, OracleLimits::default()).unwrap();
        assert_eq!(obj, 3);
        assert_eq!(a.k, 2);
    }

    #[test]
    fn no_swept_edges_is_one_stage() {
        let g =
            ComputationalGraph::from_edges(4, &[(0, 1, false), (0, 2, false), (1, 3, false), (2, 3, false)]).unwrap();
        assert_eq!(opt(&g, 7), 7);
    }

    #[test]
    fn heat1d() {
        let g = crate::frontend::gen_heat1d_midpoint().graph;
        assert_eq!(opt(&g, 1), 4);
        assert_eq!(opt(&g, 5), 12);
    }

    #[test]
    fn limits() {
        let g = random_graph(3, 9, 0.4, 0.3);
        assert!(matches!(
            brute_force_optimum(&g, 1, OracleLimits::default()),
            Err(OracleError::TooLarge { vertices: 9, limit: 8 })
        ));
        let chain = ComputationalGraph::from_edges(3, &[(0, 1, true), (1, 2, true)]).unwrap();
        assert_eq!(
            brute_force_optimum(&chain, 1, OracleLimits { max_vertices: 8, max_k: Some(1) }),
            Err(OracleError::Infeasible(1))
        );
    }

    #[test]
    fn random_graph_is_deterministic() {
        let a = random_graph(0, 5, 0.5, 0.5);
        let b = random_graph(0, 5, 0.5, 0.5);
        assert_eq!(a, b);
        assert_ne!(random_graph(1, 6, 0.5, 0.5), random_graph(2, 6, 0.5, 0.5));
    }

    #[test]
    fn empty_draw_falls_back_to_chain() {
        let g = random_graph(0, 5, 0.0, 0.0);
        assert_eq!(g.edge_count(), 4);
        assert_eq!(g.sources(), vec![VertexId(0)]);
        assert_eq!(g.sinks(), vec![VertexId(4)]);
    }

    #[test]
    fn path_enumeration_matches_dp() {
        for seed in 0..50 {
            let g = random_graph(seed, 9, 0.35, 0.4);
            assert_eq!(path_max_swept(&g), g.swept_depth().unwrap());
        }
    }
}
