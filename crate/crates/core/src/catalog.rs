//! Named example graphs: the three stencil benchmarks and six small
//! hand-built graphs (`manu-a` to `manu-f`).

use thiserror::Error;

use crate::frontend::{gen_euler3d_rk4, gen_heat1d_midpoint, gen_heat3d_midpoint, parse, trace, TracedGraph};
use crate::graph::{read_graph_json, ComputationalGraph};

pub const EXAMPLE_NAMES: [&str; 9] =
    ["heat1d", "heat3d", "euler3d", "manu-a", "manu-b", "manu-c", "manu-d", "manu-e", "manu-f"];

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CatalogError {
    #[error("unknown example `{0}`; expected one of: heat1d, heat3d, euler3d, manu-a .. manu-f")]
    UnknownExample(String),
}

#[derive(Clone, Debug)]
pub struct Example {
    pub graph: ComputationalGraph,
    /// Expression metadata, present for the stencil benchmarks.
    pub traced: Option<TracedGraph>,
}

impl From<TracedGraph> for Example {
    fn from(t: TracedGraph) -> Self {
        Example { graph: t.graph.clone(), traced: Some(t) }
    }
}

/// Vertex weights shared by the hand-built cases.
pub const MANU_WEIGHTS: [u32; 8] = [1, 4, 1, 2, 1, 1, 4, 1];

/// Edges of case `a` to `f`. Case `a` is an eight-vertex chain with three
/// swept links; every later case adds to the previous one.
pub fn manufactured_edges(case: char) -> Option<Vec<(u32, u32, bool)>> {
    let mut edges =
        vec![(0, 1, false), (1, 2, true), (2, 3, false), (3, 4, true), (4, 5, false), (5, 6, true), (6, 7, false)];
    let n = "abcdef".find(case)?;
    if n >= 1 {
        edges.extend([(0, 2, false), (5, 7, false)]);
    }
    if n >= 2 {
        edges.push((1, 3, false));
    }
    if n >= 3 {
        edges.push((2, 5, false));
    }
    if n >= 4 {
        edges.push((2, 6, false));
    }
    if n >= 5 {
        let link = edges.iter_mut().find(|x| (x.0, x.1) == (4, 5)).expect("chain link 4 -> 5");
        link.2 = true;
    }
    Some(edges)
}

pub fn manufactured(case: char) -> Option<ComputationalGraph> {
    let edges = manufactured_edges(case)?;
    Some(ComputationalGraph::with_weights(&MANU_WEIGHTS, &edges).expect("fixture is a DAG"))
}

pub fn example(name: &str) -> Result<Example, CatalogError> {
    let unknown = || CatalogError::UnknownExample(name.to_string());
    match name {
        "heat1d" => Ok(gen_heat1d_midpoint().into()),
        "heat3d" => Ok(gen_heat3d_midpoint().into()),
        "euler3d" => Ok(gen_euler3d_rk4().into()),
        _ => {
            let case = name
                .strip_prefix("manu-")
                .filter(|c| c.len() == 1)
                .and_then(|c| c.chars().next())
                .ok_or_else(unknown)?;
            let graph = manufactured(case).ok_or_else(unknown)?;
            Ok(Example { graph, traced: None })
        }
    }
}

/// Loads an input file's text: `.json` as a graph, anything else as DSL.
pub fn from_source(file_name: &str, text: &str) -> Result<Example, crate::Error> {
    if file_name.ends_with(".json") {
        return Ok(Example { graph: read_graph_json(text)?, traced: None });
    }
    Ok(trace(&parse(text)?).into())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn every_name_loads() {
        for name in EXAMPLE_NAMES {
            let ex = example(name).unwrap();
            ex.graph.validate().unwrap();
            assert_eq!(ex.traced.is_some(), !name.starts_with("manu"));
        }
        assert_eq!(example("nope").unwrap_err(), CatalogError::UnknownExample("nope".into()));
        assert!(example("manu-g").is_err());
        assert!(example("manu-ab").is_err());
    }

    #[test]
    fn sources_by_extension() {
        use crate::frontend::HEAT1D_MIDPOINT_SOURCE;
        let dsl = from_source("heat.stencil", HEAT1D_MIDPOINT_SOURCE).unwrap();
        assert_eq!(dsl.graph, gen_heat1d_midpoint().graph);
        let json = crate::graph::write_graph_json(&dsl.graph);
        let back = from_source("heat.json", &json).unwrap();
        assert_eq!(back.graph, dsl.graph);
        assert!(back.traced.is_none());
        assert!(from_source("bad.json", "{").is_err());
    }

    #[test]
    fn cases_grow() {
        let counts: Vec<usize> = "abcdef".chars().map(|c| manufactured(c).unwrap().edge_count()).collect();
        assert_eq!(counts, vec![7, 9, 10, 11, 12, 12]);
        assert_eq!(manufactured('a').unwrap().swept_edge_count(), 3);
        assert_eq!(manufactured('f').unwrap().swept_edge_count(), 4);
    }
}
