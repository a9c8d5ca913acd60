use std::fmt::Write as _;

use super::Decomposition;

/// Stage colors, cycled when there are more than twelve stages.
pub const PALETTE: [&str; 12] = [
    "#8dd3c7", "#ffffb3", "#bebada", "#fb8072", "#80b1d3", "#fdb462", "#b3de69", "#fccde5", "#d9d9d9", "#bc80bd",
    "#ccebc5", "#ffed6f",
];

fn color(k: i64) -> &'static str {
    PALETTE[(k - 1).rem_euclid(PALETTE.len() as i64) as usize]
}

/// Graphviz rendering. Vertices take the color of their creating stage and
/// edges the color of the stage that owns them; swept edges are drawn thick
/// and vertices shared across stages get a double outline.
pub fn render_dot(dec: &Decomposition) -> String {
    let a = &dec.assignment;
    let mut out = String::new();
    let _ = writeln!(out, "digraph decomposition {{");
    let _ = writeln!(out, "  label=\"K = {}\";", dec.stage_count());
    let _ = writeln!(out, "  node [shape=circle, style=filled];");
    for v in dec.graph.vertices() {
        let i = v.id.index();
        let shared = if a.d[i] > a.c[i] { ", peripheries=2" } else { "" };
        let _ = writeln!(out, "  v{i} [label=<{i}<SUB>{}</SUB>>, fillcolor=\"{}\"{shared}];", v.weight, color(a.c[i]));
    }
    for e in dec.graph.edges() {
        let swept = if e.swept { ", penwidth=3" } else { "" };
        let _ = writeln!(out, "  v{} -> v{} [color=\"{}\"{swept}];", e.src, e.dst, color(a.c[e.dst.index()]));
    }
    out.push_str("}\n");
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::decompose::decompose;
    use crate::graph::ComputationalGraph;
    use crate::model::Assignment;

    #[test]
    fn single_vertex() {
        let g = ComputationalGraph::from_edges(1, &[]).unwrap();
        let dec = decompose(&g, &Assignment { k: 1, c: vec![1], d: vec![1], e: vec![1] }).unwrap();
        let dot = render_dot(&dec);
        assert!(dot.starts_with("digraph decomposition {\n"));
        assert!(dot.contains("v0 [label=<0<SUB>1</SUB>>, fillcolor=\"#8dd3c7\"];"));
        assert!(!dot.contains("->"));
    }

    #[test]
    fn palette_cycles() {
        assert_eq!(color(1), color(13));
        assert_ne!(color(1), color(2));
    }
}
