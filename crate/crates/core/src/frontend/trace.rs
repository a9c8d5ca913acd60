use std::collections::HashMap;

use super::expr::{format_scalar, BinOp, ExprId, Scalar, Shift, StencilExpr};
use super::StencilProgram;
use crate::graph::{ComputationalGraph, Edge, Vertex, VertexId};

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Operand {
    Value(VertexId),
    Const(Scalar),
}

/// How a vertex's value is computed from other vertices.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum VertexOp {
    Input(String),
    Neg(VertexId),
    Binary(BinOp, Operand, Operand),
    Shift(Shift, VertexId),
}

/// A computational graph together with the expression behind each vertex.
#[derive(Clone, Debug)]
pub struct TracedGraph {
    pub graph: ComputationalGraph,
    pub ops: Vec<VertexOp>,
    pub inputs: Vec<(String, VertexId)>,
    pub outputs: Vec<(String, VertexId)>,
}

impl TracedGraph {
    /// Identifier for a vertex in generated code: the input name for inputs,
    /// `t<id>` for everything else.
    pub fn value_name(&self, v: VertexId) -> String {
        match &self.ops[v.index()] {
            VertexOp::Input(name) if !looks_generated(name) => name.clone(),
            _ => format!("t{}", v.0),
        }
    }
}

fn looks_generated(name: &str) -> bool {
    name.len() > 1 && name.starts_with('t') && name[1..].bytes().all(|b| b.is_ascii_digit())
}

/// Lowers a program to its computational graph.
///
/// Inputs take ids `0..inputs` in declaration order; every other non-constant
/// node reachable from an output follows in creation order, which is already
/// topological. Edges into shift nodes are swept.
pub fn trace(program: &StencilProgram) -> TracedGraph {
    let arena = &program.arena;
    let reachable = arena.reachable(program.outputs.iter().map(|(_, id)| *id));

    let mut vid: HashMap<ExprId, VertexId> = HashMap::new();
    let mut order: Vec<ExprId> = Vec::new();
    for decl in &program.inputs {
        vid.insert(decl.expr, VertexId::from(order.len()));
        order.push(decl.expr);
    }
    for (id, node) in arena.iter() {
        if reachable[id.index()] && !matches!(node, StencilExpr::Const(_) | StencilExpr::Input(_)) {
            vid.insert(id, VertexId::from(order.len()));
            order.push(id);
        }
    }

    let mut names: HashMap<ExprId, &str> = HashMap::new();
    for (name, id) in program.lets.iter().chain(program.outputs.iter()) {
        names.entry(*id).or_insert(name.as_str());
    }

    let operand = |id: ExprId| match arena.get(id) {
        StencilExpr::Const(c) => Operand::Const(c.clone()),
        _ => Operand::Value(vid[&id]),
    };

    let mut vertices = Vec::with_capacity(order.len());
    let mut edges = Vec::new();
    let mut ops = Vec::with_capacity(order.len());
    for (k, &eid) in order.iter().enumerate() {
        let v = VertexId::from(k);
        let (op, weight) = match arena.get(eid) {
            StencilExpr::Input(slot) => {
                let decl = &program.inputs[*slot as usize];
                (VertexOp::Input(decl.name.clone()), decl.weight)
            }
            StencilExpr::Neg(a) => (VertexOp::Neg(vid[a]), 1),
            StencilExpr::Shift(d, a) => (VertexOp::Shift(*d, vid[a]), 1),
            StencilExpr::Binary(op, a, b) => (VertexOp::Binary(*op, operand(*a), operand(*b)), 1),
            StencilExpr::Const(_) => unreachable!("constants are never vertices"),
        };
        let swept = matches!(op, VertexOp::Shift(..));
        let mut preds: Vec<VertexId> = match &op {
            VertexOp::Input(_) => vec![],
            VertexOp::Neg(a) | VertexOp::Shift(_, a) => vec![*a],
            VertexOp::Binary(_, a, b) => [a, b]
                .into_iter()
                .filter_map(|o| match o {
                    Operand::Value(x) => Some(*x),
                    Operand::Const(_) => None,
                })
                .collect(),
        };
        preds.dedup();
        edges.extend(preds.into_iter().map(|src| Edge { src, dst: v, swept }));

        let label = match &op {
            VertexOp::Input(name) => name.clone(),
            _ => match names.get(&eid) {
                Some(n) => (*n).to_string(),
                None => describe(&op),
            },
        };
        vertices.push(Vertex { id: v, weight, label: Some(label) });
        ops.push(op);
    }

    let graph = ComputationalGraph::new(vertices, edges).expect("traced graph is well formed");
    TracedGraph {
        graph,
        ops,
        inputs: program.inputs.iter().map(|d| (d.name.clone(), vid[&d.expr])).collect(),
        outputs: program.outputs.iter().map(|(n, id)| (n.clone(), vid[id])).collect(),
    }
}

fn describe(op: &VertexOp) -> String {
    let o = |x: &Operand| match x {
        Operand::Value(v) => format!("#{v}"),
        Operand::Const(c) => format_scalar(c),
    };
    match op {
        VertexOp::Input(n) => n.clone(),
        VertexOp::Neg(a) => format!("-#{a}"),
        VertexOp::Shift(d, a) => format!("{}(#{a})", d.name()),
        VertexOp::Binary(b, x, y) => format!("{} {} {}", o(x), b.symbol(), o(y)),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::frontend::parse;

    #[test]
    fn pass_through_input_is_source_and_sink() {
        let t = trace(&parse("input u; output r = u;").unwrap());
        assert_eq!(t.graph.vertex_count(), 1);
        let r = t.graph.validate().unwrap();
        assert_eq!(r.sources, r.sinks);
        assert_eq!(t.outputs, vec![("r".to_string(), VertexId(0))]);
    }

    #[test]
    fn shared_subexpression_appears_once() {
        let t = trace(&parse("input u; let s = im(u) + ip(u); output a = s * 2; output b = s - u;").unwrap());
        let s = t.graph.vertices().iter().find(|v| v.label.as_deref() == Some("s")).unwrap().id;
        let out = t.graph.out_edges();
        assert_eq!(out[s.index()].len(), 2);
        assert_eq!(t.graph.sinks().len(), 2);
    }

    #[test]
    fn square_has_a_single_edge() {
        let t = trace(&parse("input u; output r = u * u;").unwrap());
        assert_eq!(t.graph.edge_count(), 1);
        t.graph.validate().unwrap();
    }

    #[test]
    fn dead_lets_are_not_traced() {
        let t = trace(&parse("input u; let unused = ip(u); output r = u + 1;").unwrap());
        assert_eq!(t.graph.vertex_count(), 2);
        assert_eq!(t.graph.swept_edge_count(), 0);
    }

    #[test]
    fn unused_input_stays_a_source() {
        let t = trace(&parse("input u; input v; output r = u + 1;").unwrap());
        assert_eq!(t.graph.vertex_count(), 3);
        assert_eq!(t.graph.validate().unwrap().isolated, vec![VertexId(1)]);
    }

    #[test]
    fn generated_looking_input_names_are_renamed() {
        let t = trace(&parse("input t1; input u; output r = t1 + u;").unwrap());
        assert_eq!(t.value_name(VertexId(0)), "t0");
        assert_eq!(t.value_name(VertexId(1)), "u");
    }
}
