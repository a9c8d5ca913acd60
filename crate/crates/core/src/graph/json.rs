use serde::{Deserialize, Serialize};

use super::{ComputationalGraph, Edge, GraphError, Vertex, VertexId};

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct GraphDoc {
    vertices: Vec<VertexDoc>,
    edges: Vec<EdgeDoc>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct VertexDoc {
    id: u32,
    weight: u32,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    label: Option<String>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct EdgeDoc {
    src: u32,
    dst: u32,
    swept: bool,
}

/// Parses the graph interchange format.
///
/// Vertices may appear in any order but their ids must cover `0..n` exactly.
pub fn read_graph_json(text: &str) -> Result<ComputationalGraph, GraphError> {
    let doc: GraphDoc = serde_json::from_str(text).map_err(|e| {
        if e.is_data() {
            GraphError::SchemaError(e.to_string())
        } else {
            GraphError::ParseError { line: e.line(), message: e.to_string() }
        }
    })?;

    let n = doc.vertices.len();
    let mut slots: Vec<Option<Vertex>> = vec![None; n];
    for v in doc.vertices {
        if v.weight == 0 {
            return Err(GraphError::SchemaError(format!("vertex {}: weight must be ≥ 1", v.id)));
        }
        let slot = slots
            .get_mut(v.id as usize)
            .ok_or_else(|| GraphError::SchemaError(format!("vertex id {} out of range 0..{n}", v.id)))?;
        if slot.is_some() {
            return Err(GraphError::SchemaError(format!("vertex id {} repeated", v.id)));
        }
        *slot = Some(Vertex { id: VertexId(v.id), weight: v.weight, label: v.label });
    }
    let vertices: Vec<Vertex> = slots.into_iter().map(|v| v.expect("ids are a permutation")).collect();

    let mut edges = Vec::with_capacity(doc.edges.len());
    for e in doc.edges {
        if e.src as usize >= n || e.dst as usize >= n {
            return Err(GraphError::SchemaError(format!("edge ({}, {}) references unknown vertex", e.src, e.dst)));
        }
        edges.push(Edge { src: VertexId(e.src), dst: VertexId(e.dst), swept: e.swept });
    }
    ComputationalGraph::new(vertices, edges)
}

pub fn write_graph_json(graph: &ComputationalGraph) -> String {
    let doc = GraphDoc {
        vertices: graph
            .vertices()
            .iter()
            .map(|v| VertexDoc { id: v.id.0, weight: v.weight, label: v.label.clone() })
            .collect(),
        edges: graph.edges().iter().map(|e| EdgeDoc { src: e.src.0, dst: e.dst.0, swept: e.swept }).collect(),
    };
    let mut s = serde_json::to_string_pretty(&doc).expect("graph serializes");
    s.push('\n');
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unknown_vertex_in_edge() {
        let text = r#"{"vertices":[{"id":0,"weight":1}],"edges":[{"src":0,"dst":3,"swept":false}]}"#;
        assert!(matches!(read_graph_json(text), Err(GraphError::SchemaError(_))));
    }

    #[test]
    fn zero_weight() {
        let text = r#"{"vertices":[{"id":0,"weight":0}],"edges":[]}"#;
        match read_graph_json(text) {
            Err(GraphError::SchemaError(m)) => assert!(m.contains("weight must be ≥ 1"), "{m}"),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn unknown_field_is_schema_error() {
        let text = r#"{"vertices":[{"id":0,"weight":1,"colour":"red"}],"edges":[]}"#;
        assert!(matches!(read_graph_json(text), Err(GraphError::SchemaError(_))));
    }

    #[test]
    fn syntax_error_reports_line() {
        let text = "{\n\"vertices\": [\n{\"id\": 0,, \"weight\": 1}]}";
        match read_graph_json(text) {
            Err(GraphError::ParseError { line, .. }) => assert_eq!(line, 3),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn vertices_out_of_order_are_accepted() {
        let text = r#"{"vertices":[{"id":1,"weight":2},{"id":0,"weight":1,"label":"u"}],
                       "edges":[{"src":0,"dst":1,"swept":true}]}"#;
        let g = read_graph_json(text).unwrap();
        assert_eq!(g.vertices()[0].label.as_deref(), Some("u"));
        assert_eq!(g.weight(VertexId(1)), 2);
    }
}
