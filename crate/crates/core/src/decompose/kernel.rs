//! Per-stage kernel text.
//!
//! ```text
//! input u0;
//! t1 = IN(u0, i-1);
//! t4 = t1 + t3;
//! t5 = (0.05) * t4;
//! output t7;
//! ```
//!
//! Each statement assigns one vertex. Shift reads are `IN(value, offset)`,
//! constants are parenthesized, and a bare `name = value;` binds an output
//! name in the last stage.

use std::collections::{HashMap, HashSet};
use std::fmt::Write as _;

use super::{DecomposeError, Decomposition};
use crate::frontend::{format_scalar, parse_scalar, BinOp, Operand, Shift, TracedGraph, VertexOp};
use crate::graph::{ComputationalGraph, Edge, Vertex, VertexId};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct StageKernel {
    pub k: u32,
    pub text: String,
}

impl StageKernel {
    pub fn file_name(&self) -> String {
        format!("stage_{}.kernel", self.k)
    }
}

fn operand(traced: &TracedGraph, o: &Operand) -> String {
    match o {
        Operand::Value(v) => traced.value_name(*v),
        Operand::Const(c) => format!("({})", format_scalar(c)),
    }
}

fn statement(traced: &TracedGraph, v: VertexId) -> Option<String> {
    let name = traced.value_name(v);
    let rhs = match &traced.ops[v.index()] {
        VertexOp::Input(_) => return None,
        VertexOp::Neg(a) => format!("-{}", traced.value_name(*a)),
        VertexOp::Shift(d, a) => format!("IN({}, {})", traced.value_name(*a), d.offset()),
        VertexOp::Binary(op, x, y) => format!("{} {} {}", operand(traced, x), op.symbol(), operand(traced, y)),
    };
    Some(format!("{name} = {rhs};"))
}

/// One kernel per stage. Statements are the vertices the stage creates, in
/// topological order; inputs are the stage sources and outputs are the
/// values later stages (or the caller) read.
pub fn emit_stage_kernels(
    dec: &Decomposition,
    traced: Option<&TracedGraph>,
) -> Result<Vec<StageKernel>, DecomposeError> {
    let traced = match traced {
        Some(t) if t.graph == dec.graph => t,
        _ => return Err(DecomposeError::MissingExprMetadata),
    };
    let order = dec.graph.topological_order().expect("decomposed graph is acyclic");
    let kmax = dec.stage_count();
    let c = &dec.assignment.c;
    let mut out = Vec::with_capacity(dec.stages.len());
    for stage in &dec.stages {
        let k = i64::from(stage.k);
        let mut text = String::new();
        let _ = writeln!(text, "# stage {} of {kmax}", stage.k);
        let inputs: Vec<VertexId> =
            if stage.k == 1 { traced.inputs.iter().map(|(_, v)| *v).collect() } else { stage.shared_in.clone() };
        for v in inputs {
            let _ = writeln!(text, "input {};", traced.value_name(v));
        }
        for &v in order.iter().filter(|v| c[v.index()] == k) {
            if let Some(s) = statement(traced, v) {
                let _ = writeln!(text, "{s}");
            }
        }
        let last = stage.k == kmax;
        if last {
            for (name, v) in &traced.outputs {
                let value = traced.value_name(*v);
                if *name != value {
                    let _ = writeln!(text, "{name} = {value};");
                }
                let _ = writeln!(text, "output {name};");
            }
        } else {
            for v in stage.outputs(&dec.graph, false) {
                let _ = writeln!(text, "output {};", traced.value_name(v));
            }
        }
        out.push(StageKernel { k: stage.k, text });
    }
    Ok(out)
}

/// The graph rebuilt from kernel text.
#[derive(Clone, Debug)]
pub struct KernelProgram {
    pub graph: ComputationalGraph,
    pub names: Vec<String>,
    pub ops: Vec<VertexOp>,
    pub outputs: Vec<(String, VertexId)>,
}

struct Reader {
    names: Vec<String>,
    ops: Vec<VertexOp>,
    table: HashMap<String, VertexId>,
    visible: HashSet<VertexId>,
    outputs: Vec<(String, VertexId)>,
}

impl Reader {
    fn lookup(&self, name: &str, line: usize) -> Result<VertexId, DecomposeError> {
        match self.table.get(name) {
            Some(v) if self.visible.contains(v) => Ok(*v),
            Some(_) => {
                Err(DecomposeError::KernelParse { line, message: format!("`{name}` is not available in this stage") })
            }
            None => Err(DecomposeError::KernelParse { line, message: format!("`{name}` is not defined") }),
        }
    }

    fn operand(&self, tok: &str, line: usize) -> Result<Operand, DecomposeError> {
        match tok.strip_prefix('(').and_then(|t| t.strip_suffix(')')) {
            Some(num) => {
                let (neg, body) = match num.strip_prefix('-') {
                    Some(b) => (true, b),
                    None => (false, num),
                };
                let v = parse_scalar(body)
                    .ok_or_else(|| DecomposeError::KernelParse { line, message: format!("bad constant `{num}`") })?;
                Ok(Operand::Const(if neg { -v } else { v }))
            }
            None => Ok(Operand::Value(self.lookup(tok, line)?)),
        }
    }

    fn define(&mut self, name: &str, op: VertexOp, line: usize) -> Result<(), DecomposeError> {
        if self.table.contains_key(name) {
            return Err(DecomposeError::KernelParse { line, message: format!("`{name}` assigned twice") });
        }
        let v = VertexId::from(self.ops.len());
        self.table.insert(name.to_string(), v);
        self.visible.insert(v);
        self.names.push(name.to_string());
        self.ops.push(op);
        Ok(())
    }
}

/// Parses kernels in stage order. A stage may only read values the previous
/// stage declared as outputs.
pub fn read_kernels(texts: &[&str]) -> Result<KernelProgram, DecomposeError> {
    let mut r = Reader {
        names: Vec::new(),
        ops: Vec::new(),
        table: HashMap::new(),
        visible: HashSet::new(),
        outputs: Vec::new(),
    };
    let mut handed_on: Option<HashSet<String>> = None;
    let mut line_no = 0;
    for text in texts {
        let mut declared_out = HashSet::new();
        r.visible.clear();
        for raw in text.lines() {
            line_no += 1;
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let bad = |message: String| DecomposeError::KernelParse { line: line_no, message };
            let body = line.strip_suffix(';').ok_or_else(|| bad("missing `;`".into()))?;
            if let Some(name) = body.strip_prefix("input ") {
                let name = name.trim();
                match &handed_on {
                    None if !r.table.contains_key(name) => {
                        r.define(name, VertexOp::Input(name.to_string()), line_no)?
                    }
                    None => return Err(bad(format!("input `{name}` declared twice"))),
                    Some(prev) if prev.contains(name) => {
                        r.visible.insert(r.table[name]);
                    }
                    Some(_) => return Err(bad(format!("`{name}` is not an output of the previous stage"))),
                }
            } else if let Some(name) = body.strip_prefix("output ") {
                let name = name.trim();
                r.lookup(name, line_no)?;
                declared_out.insert(name.to_string());
            } else {
                let (lhs, rhs) = body.split_once(" = ").ok_or_else(|| bad(format!("cannot parse `{line}`")))?;
                let (lhs, rhs) = (lhs.trim(), rhs.trim());
                if let Some(args) = rhs.strip_prefix("IN(").and_then(|a| a.strip_suffix(')')) {
                    let (a, off) = args.split_once(',').ok_or_else(|| bad("IN needs two arguments".into()))?;
                    let dir =
                        Shift::from_offset(off.trim()).ok_or_else(|| bad(format!("bad offset `{}`", off.trim())))?;
                    let a = r.lookup(a.trim(), line_no)?;
                    r.define(lhs, VertexOp::Shift(dir, a), line_no)?;
                    continue;
                }
                let toks: Vec<&str> = rhs.split_whitespace().collect();
                match toks[..] {
                    [x, op, y] => {
                        let op = match op {
                            "+" => BinOp::Add,
                            "-" => BinOp::Sub,
                            "*" => BinOp::Mul,
                            "/" => BinOp::Div,
                            other => return Err(bad(format!("unknown operator `{other}`"))),
                        };
                        let (x, y) = (r.operand(x, line_no)?, r.operand(y, line_no)?);
                        r.define(lhs, VertexOp::Binary(op, x, y), line_no)?;
                    }
                    [x] if x.starts_with('-') => {
                        let a = r.lookup(&x[1..], line_no)?;
                        r.define(lhs, VertexOp::Neg(a), line_no)?;
                    }
                    [x] => {
                        let v = r.lookup(x, line_no)?;
                        r.table.insert(lhs.to_string(), v);
                        r.outputs.push((lhs.to_string(), v));
                    }
                    _ => return Err(bad(format!("cannot parse `{rhs}`"))),
                }
            }
        }
        handed_on = Some(declared_out);
    }
    // outputs named after the value itself have no binding line
    if let Some(last) = &handed_on {
        let mut named: Vec<&String> = last.iter().filter(|n| !r.outputs.iter().any(|(o, _)| o == *n)).collect();
        named.sort();
        for n in named {
            let v = r.table[n.as_str()];
            r.outputs.push((n.clone(), v));
        }
    }

    let mut vertices = Vec::with_capacity(r.ops.len());
    let mut edges = Vec::new();
    for (i, op) in r.ops.iter().enumerate() {
        let v = VertexId::from(i);
        vertices.push(Vertex { id: v, weight: 1, label: Some(r.names[i].clone()) });
        let mut preds: Vec<VertexId> = match op {
            VertexOp::Input(_) => vec![],
            VertexOp::Neg(a) | VertexOp::Shift(_, a) => vec![*a],
            VertexOp::Binary(_, x, y) => [x, y]
                .into_iter()
                .filter_map(|o| match o {
                    Operand::Value(p) => Some(*p),
                    Operand::Const(_) => None,
                })
                .collect(),
        };
        preds.dedup();
        let swept = matches!(op, VertexOp::Shift(..));
        edges.extend(preds.into_iter().map(|src| Edge { src, dst: v, swept }));
    }
    let graph = ComputationalGraph::new(vertices, edges)
        .map_err(|e| DecomposeError::KernelParse { line: line_no, message: e.to_string() })?;
    Ok(KernelProgram { graph, names: r.names, ops: r.ops, outputs: r.outputs })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::decompose::decompose;
    use crate::frontend::{parse, trace};
    use crate::model::Assignment;

    #[test]
    fn identity_program() {
        let t = trace(&parse("input in; output out = in;").unwrap());
        let dec = decompose(&t.graph, &Assignment { k: 1, c: vec![1], d: vec![1], e: vec![1] }).unwrap();
        let ks = emit_stage_kernels(&dec, Some(&t)).unwrap();
        assert_eq!(ks.len(), 1);
        assert!(ks[0].text.contains("input in;\nout = in;\noutput out;\n"));
        assert_eq!(ks[0].file_name(), "stage_1.kernel");
    }

    #[test]
    fn missing_metadata() {
        let g = ComputationalGraph::from_edges(1, &[]).unwrap();
        let dec = decompose(&g, &Assignment { k: 1, c: vec![1], d: vec![1], e: vec![1] }).unwrap();
        assert_eq!(emit_stage_kernels(&dec, None), Err(DecomposeError::MissingExprMetadata));
        let other = trace(&parse("input u; output r = ip(u);").unwrap());
        assert_eq!(emit_stage_kernels(&dec, Some(&other)), Err(DecomposeError::MissingExprMetadata));
    }

    #[test]
    fn statements_render_constants_and_shifts() {
        let t = trace(&parse("input u; output r = ip(u) / 3 - u;").unwrap());
        let a = Assignment { k: 1, c: vec![1; 4], d: vec![1; 4], e: vec![1, 2, 2, 2] };
        let dec = decompose(&t.graph, &a).unwrap();
        let text = &emit_stage_kernels(&dec, Some(&t)).unwrap()[0].text;
        assert!(text.contains("t1 = IN(u, i+1);"), "{text}");
        assert!(text.contains("t2 = t1 / (3);"), "{text}");
        assert!(text.contains("t3 = t2 - u;"), "{text}");
    }

    #[test]
    fn reader_rejects_unshared_reads() {
        let err = read_kernels(&["input u;\nt1 = IN(u, i-1);\noutput t1;\n", "input t1;\nt2 = t1 + u;\noutput t2;\n"]);
        assert!(matches!(err, Err(DecomposeError::KernelParse { line: 5, .. })));
    }

    #[test]
    fn reader_parses_negative_rationals() {
        let p = read_kernels(&["input u;\nt1 = (-1/6) * u;\nr = t1;\noutput r;\n"]).unwrap();
        assert_eq!(p.graph.vertex_count(), 2);
        assert_eq!(p.outputs, vec![("r".to_string(), VertexId(1))]);
        let VertexOp::Binary(BinOp::Mul, Operand::Const(c), _) = &p.ops[1] else { panic!() };
        assert_eq!(format_scalar(c), "-1/6");
    }
}
