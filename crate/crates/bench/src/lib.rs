//! Inputs shared by the benchmarks.

use quarkflow::catalog;
use quarkflow::report::suite_graph;
use quarkflow::ComputationalGraph;

/// The three stencil benchmarks, by name.
pub fn stencils() -> Vec<(&'static str, ComputationalGraph)> {
    ["heat1d", "heat3d", "euler3d"]
        .into_iter()
        .map(|name| (name, catalog::example(name).expect("bundled example").graph))
        .collect()
}

/// A fixed slice of the random oracle suite.
pub fn random_suite(count: u64) -> Vec<ComputationalGraph> {
    (0..count).map(suite_graph).collect()
}
