//! Min-cost transshipment network dual to the decomposition program.
//!
//! Every difference constraint `u - v <= b` becomes an arc `u -> v` with
//! cost `b`; equalities become arcs with no lower bound. Node supplies are
//! the negated objective coefficients, so optimal node potentials are an
//! optimal primal assignment and the minimum flow cost is the negated
//! primal optimum.
//!
//! | family | constraint          | arc          | cost | lower |
//! |--------|---------------------|--------------|------|-------|
//! | 1      | c_i - d_i <= 0      | c_i -> d_i   | 0    | 0     |
//! | 2      | c_i - ground == 1   | c_i -> ground| 1    | free  |
//! | 3      | d_i - K == 0        | d_i -> K     | 0    | free  |
//! | 4      | c_i - c_j <= 0      | c_i -> c_j   | 0    | 0     |
//! | 4      | c_j - d_i <= 0      | c_j -> d_i   | 0    | 0     |
//! | 5      | c_i - e_i <= 0      | c_i -> e_i   | 0    | 0     |
//! | 5      | e_i - c_i <= 1      | e_i -> c_i   | 1    | 0     |
//! | 6      | e_i - e_j <= 0      | e_i -> e_j   | 0    | 0     |
//! | 7      | e_i - e_j <= -1     | e_i -> e_j   | -1   | 0     |
//! | 8      | c_i - e_i <= -1     | c_i -> e_i   | -1   | 0     |
//!
//! Supplies: `+w_i` at c_i, `-w_i` at d_i, `0` at e_i, `-W_K` at K and
//! `+W_K` at ground.

mod simplex;

use std::fmt::Write as _;

use thiserror::Error;

use crate::graph::VertexId;
use crate::model::{Assignment, DecompositionModel, Family, ModelVar};

pub use simplex::solve_mcnf;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum LowerBound {
    Zero,
    /// Unbounded in both directions (equality constraint).
    Free,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct FlowNode {
    pub var: ModelVar,
    pub supply: i64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct FlowArc {
    pub from: usize,
    pub to: usize,
    pub cost: i64,
    pub lower: LowerBound,
    pub family: Family,
}

/// Nodes are indexed by [`ModelVar::index`]; arcs follow the model's
/// constraint order.
#[derive(Clone, Debug)]
pub struct FlowNetwork {
    pub nodes: Vec<FlowNode>,
    pub arcs: Vec<FlowArc>,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum FlowError {
    #[error("supplies sum to {0}, not 0")]
    Unbalanced(i64),
    #[error("negative-cost cycle of unbounded capacity through arc {arc}")]
    NegativeCostCycle { arc: usize },
    #[error("no optimum after {0} pivots")]
    NonConvergence(u64),
    #[error("no feasible flow: artificial arcs still carry {0}")]
    Infeasible(i64),
    #[error("source potentials disagree: c{first} and c{other} differ by {gap}")]
    InconsistentPinning { first: VertexId, other: VertexId, gap: i64 },
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FlowSolution {
    /// Flow on each network arc; negative values only on free arcs.
    pub flows: Vec<i64>,
    /// Node potentials with the ground node at 0.
    pub potentials: Vec<i64>,
    /// Total arc cost, `sum(cost * flow)`.
    pub cost: i64,
    pub pivots: u64,
}

impl FlowSolution {
    pub fn reduced_cost(&self, arc: &FlowArc) -> i64 {
        arc.cost - self.potentials[arc.from] + self.potentials[arc.to]
    }

    /// `sum(-supply * potential)`: the primal objective of the potentials.
    pub fn dual_value(&self, net: &FlowNetwork) -> i64 {
        net.nodes.iter().zip(&self.potentials).map(|(n, p)| -n.supply * p).sum()
    }

    /// Checks flow balance, lower bounds and reduced-cost optimality on
    /// every arc. Returns one message per failure.
    pub fn check_optimality(&self, net: &FlowNetwork) -> Vec<String> {
        let mut bad = Vec::new();
        let mut excess: Vec<i64> = net.nodes.iter().map(|n| n.supply).collect();
        for (i, (arc, &x)) in net.arcs.iter().zip(&self.flows).enumerate() {
            excess[arc.from] -= x;
            excess[arc.to] += x;
            let rc = self.reduced_cost(arc);
            match arc.lower {
                LowerBound::Free if rc != 0 => bad.push(format!("free arc {i}: reduced cost {rc}")),
                LowerBound::Zero if x < 0 => bad.push(format!("arc {i}: flow {x} below 0")),
                LowerBound::Zero if rc < 0 => bad.push(format!("arc {i}: reduced cost {rc} < 0")),
                LowerBound::Zero if x > 0 && rc != 0 => bad.push(format!("arc {i}: flow {x} with reduced cost {rc}")),
                _ => {}
            }
        }
        for (v, e) in excess.iter().enumerate() {
            if *e != 0 {
                bad.push(format!("node {}: imbalance {e}", net.nodes[v].var));
            }
        }
        let arc_cost: i64 = net.arcs.iter().zip(&self.flows).map(|(a, x)| a.cost * x).sum();
        if arc_cost != self.cost {
            bad.push(format!("reported cost {} but arcs sum to {arc_cost}", self.cost));
        }
        bad
    }
}

pub fn build_network(model: &DecompositionModel) -> FlowNetwork {
    let mut nodes: Vec<FlowNode> =
        model.vars().map(|var| FlowNode { var, supply: -model.objective_coefficient(var) }).collect();
    let imbalance: i64 = nodes.iter().map(|n| n.supply).sum();
    nodes[ModelVar::Ground.index()].supply -= imbalance;
    let arcs = model
        .constraints
        .iter()
        .map(|c| FlowArc {
            from: c.u.index(),
            to: c.v.index(),
            cost: c.bound,
            lower: if c.equality { LowerBound::Free } else { LowerBound::Zero },
            family: c.family,
        })
        .collect();
    FlowNetwork { nodes, arcs }
}

impl FlowNetwork {
    pub fn vertex_count(&self) -> usize {
        (self.nodes.len() - 2) / 3
    }

    /// Symmetric bound standing in for an infinite lower bound in dumps.
    pub fn free_bound(&self) -> i64 {
        let max_cost = self.arcs.iter().map(|a| a.cost.abs()).max().unwrap_or(0);
        let supply: i64 = self.nodes.iter().map(|n| n.supply.abs()).sum();
        (self.nodes.len() as i64 + 2) * (max_cost + 1) * supply.max(1)
    }

    /// DIMACS min-cost-flow text, nodes numbered from 1.
    pub fn to_dimacs(&self) -> String {
        let m = self.free_bound();
        let mut out = String::new();
        let _ = writeln!(out, "c quarkflow transshipment network");
        for (i, n) in self.nodes.iter().enumerate() {
            let _ = writeln!(out, "c node {} = {}", i + 1, n.var);
        }
        let _ = writeln!(out, "p min {} {}", self.nodes.len(), self.arcs.len());
        for (i, n) in self.nodes.iter().enumerate() {
            if n.supply != 0 {
                let _ = writeln!(out, "n {} {}", i + 1, n.supply);
            }
        }
        for a in &self.arcs {
            let lo = match a.lower {
                LowerBound::Zero => 0,
                LowerBound::Free => -m,
            };
            let _ = writeln!(out, "a {} {} {lo} {m} {}", a.from + 1, a.to + 1, a.cost);
        }
        out
    }
}

/// Reads the assignment off the potentials, shifted so that every source
/// starts in stage 1.
pub fn extract_assignment(net: &FlowNetwork, sol: &FlowSolution) -> Result<Assignment, FlowError> {
    let mut pinned = net.arcs.iter().filter(|a| a.family == Family::SourcePin).map(|a| a.from);
    let shift = match pinned.next() {
        Some(first) => {
            let shift = 1 - sol.potentials[first];
            for other in pinned {
                let gap = sol.potentials[other] - sol.potentials[first];
                if gap != 0 {
                    let id = |i| match ModelVar::from_index(i) {
                        ModelVar::C(v) => v,
                        _ => unreachable!("source pins start at c nodes"),
                    };
                    return Err(FlowError::InconsistentPinning { first: id(first), other: id(other), gap });
                }
            }
            shift
        }
        None => -sol.potentials[ModelVar::Ground.index()],
    };
    let n = net.vertex_count();
    let val = |var: ModelVar| sol.potentials[var.index()] + shift;
    let per = |f: fn(VertexId) -> ModelVar| (0..n).map(|i| val(f(VertexId::from(i)))).collect();
    Ok(Assignment { k: val(ModelVar::K), c: per(ModelVar::C), d: per(ModelVar::D), e: per(ModelVar::E) })
}
