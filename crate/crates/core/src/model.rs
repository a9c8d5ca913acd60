//! The decomposition integer program as a system of difference constraints.

use std::collections::HashMap;
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::graph::{ComputationalGraph, GraphError, VertexId};

/// A variable of the integer program.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ModelVar {
    Ground,
    K,
    C(VertexId),
    D(VertexId),
    E(VertexId),
}

impl ModelVar {
    /// Dense index: ground 0, K 1, then (c, d, e) per vertex.
    pub fn index(self) -> usize {
        match self {
            ModelVar::Ground => 0,
            ModelVar::K => 1,
            ModelVar::C(v) => 2 + 3 * v.index(),
            ModelVar::D(v) => 3 + 3 * v.index(),
            ModelVar::E(v) => 4 + 3 * v.index(),
        }
    }

    pub fn from_index(i: usize) -> ModelVar {
        match i {
            0 => ModelVar::Ground,
            1 => ModelVar::K,
            _ => {
                let v = VertexId::from((i - 2) / 3);
                match (i - 2) % 3 {
                    0 => ModelVar::C(v),
                    1 => ModelVar::D(v),
                    _ => ModelVar::E(v),
                }
            }
        }
    }

    pub fn count(vertices: usize) -> usize {
        2 + 3 * vertices
    }
}

impl fmt::Display for ModelVar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ModelVar::Ground => write!(f, "ground"),
            ModelVar::K => write!(f, "K"),
            ModelVar::C(v) => write!(f, "c{v}"),
            ModelVar::D(v) => write!(f, "d{v}"),
            ModelVar::E(v) => write!(f, "e{v}"),
        }
    }
}

/// Which of the eight constraint families a row belongs to.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Family {
    /// c_i <= d_i
    Lifetime,
    /// c_i = 1 on sources
    SourcePin,
    /// d_i = K on sinks
    SinkPin,
    /// c_i <= c_j and c_j <= d_i per edge
    EdgeOrder,
    /// c_i <= e_i <= c_i + 1
    EffectiveWindow,
    /// e_i <= e_j per plain edge
    PlainEdge,
    /// e_i + 1 <= e_j per swept edge
    SweptEdge,
    /// c_i + 1 <= e_i when i has an incoming swept edge
    SweptTarget,
}

impl Family {
    pub fn number(self) -> u8 {
        match self {
            Family::Lifetime => 1,
            Family::SourcePin => 2,
            Family::SinkPin => 3,
            Family::EdgeOrder => 4,
            Family::EffectiveWindow => 5,
            Family::PlainEdge => 6,
            Family::SweptEdge => 7,
            Family::SweptTarget => 8,
        }
    }
}

/// `u - v <= bound`, or `u - v == bound` when `equality` is set.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct DiffConstraint {
    pub u: ModelVar,
    pub v: ModelVar,
    pub bound: i64,
    pub equality: bool,
    pub family: Family,
}

impl DiffConstraint {
    pub fn holds(&self, a: &Assignment) -> bool {
        let diff = a.value(self.u) - a.value(self.v);
        if self.equality {
            diff == self.bound
        } else {
            diff <= self.bound
        }
    }
}

impl fmt::Display for DiffConstraint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let op = if self.equality { "==" } else { "<=" };
        write!(f, "{} - {} {op} {}", self.u, self.v, self.bound)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ModelError {
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error("assignment has no value for {0}")]
    MissingVar(ModelVar),
    #[error("W_K must be >= 1")]
    ZeroWk,
}

/// Values for every model variable; ground is implicitly 0.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Assignment {
    pub k: i64,
    pub c: Vec<i64>,
    pub d: Vec<i64>,
    pub e: Vec<i64>,
}

impl Assignment {
    pub fn value(&self, var: ModelVar) -> i64 {
        match var {
            ModelVar::Ground => 0,
            ModelVar::K => self.k,
            ModelVar::C(v) => self.c[v.index()],
            ModelVar::D(v) => self.d[v.index()],
            ModelVar::E(v) => self.e[v.index()],
        }
    }

    pub fn vertex_count(&self) -> usize {
        self.c.len()
    }

    /// Builds an assignment from an explicit map; ground may be omitted but
    /// must be 0 when present.
    pub fn from_map(map: &HashMap<ModelVar, i64>, vertices: usize) -> Result<Assignment, ModelError> {
        let get = |var| map.get(&var).copied().ok_or(ModelError::MissingVar(var));
        let per = |f: fn(VertexId) -> ModelVar| -> Result<Vec<i64>, ModelError> {
            (0..vertices).map(|i| get(f(VertexId::from(i)))).collect()
        };
        Ok(Assignment { k: get(ModelVar::K)?, c: per(ModelVar::C)?, d: per(ModelVar::D)?, e: per(ModelVar::E)? })
    }

    pub fn to_map(&self) -> HashMap<ModelVar, i64> {
        let n = self.vertex_count();
        (0..ModelVar::count(n)).map(ModelVar::from_index).map(|v| (v, self.value(v))).collect()
    }
}

#[derive(Clone, Debug)]
pub struct DecompositionModel {
    pub wk: i64,
    pub weights: Vec<u32>,
    pub constraints: Vec<DiffConstraint>,
}

impl DecompositionModel {
    pub fn vertex_count(&self) -> usize {
        self.weights.len()
    }

    pub fn vars(&self) -> impl Iterator<Item = ModelVar> {
        (0..ModelVar::count(self.vertex_count())).map(ModelVar::from_index)
    }

    pub fn objective_coefficient(&self, var: ModelVar) -> i64 {
        match var {
            ModelVar::K => self.wk,
            ModelVar::D(v) => i64::from(self.weights[v.index()]),
            ModelVar::C(v) => -i64::from(self.weights[v.index()]),
            ModelVar::Ground | ModelVar::E(_) => 0,
        }
    }

    fn check_covers(&self, a: &Assignment) -> Result<(), ModelError> {
        let n = self.vertex_count();
        for (vals, f) in [(&a.c, ModelVar::C as fn(VertexId) -> ModelVar), (&a.d, ModelVar::D), (&a.e, ModelVar::E)] {
            if vals.len() < n {
                return Err(ModelError::MissingVar(f(VertexId::from(vals.len()))));
            }
        }
        Ok(())
    }

    pub fn objective_value(&self, a: &Assignment) -> Result<i64, ModelError> {
        self.check_covers(a)?;
        Ok(self.vars().map(|v| self.objective_coefficient(v) * a.value(v)).sum())
    }

    pub fn check_feasible(&self, a: &Assignment) -> Result<Vec<DiffConstraint>, ModelError> {
        self.check_covers(a)?;
        Ok(self.constraints.iter().filter(|c| !c.holds(a)).copied().collect())
    }

    /// Text dump, one constraint per line followed by the objective.
    pub fn dump(&self) -> String {
        let mut out = String::new();
        for c in &self.constraints {
            out.push_str(&c.to_string());
            out.push('\n');
        }
        out.push_str("min:");
        for (i, var) in self.vars().filter(|&v| self.objective_coefficient(v) != 0).enumerate() {
            let coef = self.objective_coefficient(var);
            let sign = match (i, coef < 0) {
                (0, false) => " ",
                (0, true) => " -",
                (_, false) => " + ",
                (_, true) => " - ",
            };
            out.push_str(&format!("{sign}{}*{var}", coef.abs()));
        }
        out.push('\n');
        out
    }
}

pub fn build_model(graph: &ComputationalGraph, wk: u64) -> Result<DecompositionModel, ModelError> {
    let report = graph.validate()?;
    if wk == 0 {
        return Err(ModelError::ZeroWk);
    }
    let wk = i64::try_from(wk).expect("W_K fits i64");
    let mut cs = Vec::new();
    let mut le = |u, v, bound, family| cs.push(DiffConstraint { u, v, bound, equality: false, family });
    let swept_target = graph.swept_targets();
    for v in graph.vertices().iter().map(|v| v.id) {
        le(ModelVar::C(v), ModelVar::D(v), 0, Family::Lifetime);
        le(ModelVar::C(v), ModelVar::E(v), 0, Family::EffectiveWindow);
        le(ModelVar::E(v), ModelVar::C(v), 1, Family::EffectiveWindow);
        if swept_target[v.index()] {
            le(ModelVar::C(v), ModelVar::E(v), -1, Family::SweptTarget);
        }
    }
    for e in graph.edges() {
        le(ModelVar::C(e.src), ModelVar::C(e.dst), 0, Family::EdgeOrder);
        le(ModelVar::C(e.dst), ModelVar::D(e.src), 0, Family::EdgeOrder);
        if e.swept {
            le(ModelVar::E(e.src), ModelVar::E(e.dst), -1, Family::SweptEdge);
        } else {
            le(ModelVar::E(e.src), ModelVar::E(e.dst), 0, Family::PlainEdge);
        }
    }
    for &s in &report.sources {
        cs.push(DiffConstraint {
            u: ModelVar::C(s),
            v: ModelVar::Ground,
            bound: 1,
            equality: true,
            family: Family::SourcePin,
        });
    }
    for &s in &report.sinks {
        cs.push(DiffConstraint {
            u: ModelVar::D(s),
            v: ModelVar::K,
            bound: 0,
            equality: true,
            family: Family::SinkPin,
        });
    }
    Ok(DecompositionModel { wk, weights: graph.vertices().iter().map(|v| v.weight).collect(), constraints: cs })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn single_swept() -> ComputationalGraph {
        ComputationalGraph::from_edges(2, &[(0, 1, true)]).unwrap()
    }

    #[test]
    fn var_index_round_trip() {
        for i in 0..ModelVar::count(4) {
            assert_eq!(ModelVar::from_index(i).index(), i);
        }
    }

    #[test]
    fn constraint_count() {
        let g = ComputationalGraph::from_edges(3, &[(0, 1, true), (1, 2, false), (0, 2, true)]).unwrap();
        let m = build_model(&g, 1).unwrap();
        // 3 per vertex, 1 per swept target, 3 per edge, 1 per pinned source/sink
        assert_eq!(m.constraints.len(), 3 * 3 + 2 + 3 * 3 + 1 + 1);
        assert!(m.constraints.iter().all(|c| (-1..=1).contains(&c.bound) && c.u != c.v));
    }

    #[test]
    fn single_swept_edge_optimum_is_feasible() {
        let m = build_model(&single_swept(), 3).unwrap();
        let a = Assignment { k: 1, c: vec![1, 1], d: vec![1, 1], e: vec![1, 2] };
        assert!(m.check_feasible(&a).unwrap().is_empty());
        assert_eq!(m.objective_value(&a).unwrap(), 3);
    }

    #[test]
    fn violations_are_reported_by_family() {
        let m = build_model(&single_swept(), 1).unwrap();
        let a = Assignment { k: 1, c: vec![1, 1], d: vec![1, 1], e: vec![1, 1] };
        let v = m.check_feasible(&a).unwrap();
        assert!(v.iter().any(|c| c.family == Family::SweptTarget));
        let a = Assignment { k: 2, c: vec![2, 1], d: vec![2, 2], e: vec![3, 2] };
        let v = m.check_feasible(&a).unwrap();
        assert!(v.iter().any(|c| c.family == Family::EdgeOrder));
    }

    #[test]
    fn zero_span_ignores_weight() {
        let g1 = ComputationalGraph::with_weights(&[1, 1], &[(0, 1, false)]).unwrap();
        let g2 = ComputationalGraph::with_weights(&[2, 1], &[(0, 1, false)]).unwrap();
        let a = Assignment { k: 1, c: vec![1, 1], d: vec![1, 1], e: vec![1, 1] };
        assert_eq!(build_model(&g1, 1).unwrap().objective_value(&a).unwrap(), 1);
        assert_eq!(build_model(&g2, 1).unwrap().objective_value(&a).unwrap(), 1);
    }

    #[test]
    fn missing_var() {
        let m = build_model(&single_swept(), 1).unwrap();
        let a = Assignment { k: 1, c: vec![1, 1], d: vec![1], e: vec![1, 2] };
        assert_eq!(m.objective_value(&a), Err(ModelError::MissingVar(ModelVar::D(VertexId(1)))));
        let full = Assignment { k: 1, c: vec![1, 1], d: vec![1, 1], e: vec![1, 2] };
        let mut map = full.to_map();
        assert_eq!(Assignment::from_map(&map, 2).unwrap(), full);
        map.remove(&ModelVar::K);
        assert!(matches!(Assignment::from_map(&map, 2), Err(ModelError::MissingVar(ModelVar::K))));
    }

    #[test]
    fn dump_format() {
        let m = build_model(&single_swept(), 1).unwrap();
        let text = m.dump();
        assert!(text.contains("c0 - d0 <= 0\n"));
        assert!(text.contains("e0 - e1 <= -1\n"));
        assert!(text.contains("c0 - ground == 1\n"));
        assert!(text.contains("d1 - K == 0\n"));
        assert!(text.ends_with("min: 1*K - 1*c0 + 1*d0 - 1*c1 + 1*d1\n"));
    }
}
