//! Decomposes stencil update formulas into a minimal sequence of atomic
//! stages.
//!
//! A formula is traced into a [`ComputationalGraph`] whose swept edges mark
//! reads of neighboring grid points. Choosing a creating stage `c_i`, a last
//! using stage `d_i` and an auxiliary label `e_i` for every vertex is an
//! integer program over difference constraints ([`model`]); its dual is a
//! min-cost transshipment problem solved exactly by network simplex
//! ([`flow`]), whose node potentials are the optimal labels. [`decompose`]
//! turns the labels into stages, and [`verify`] and [`oracle`] check the
//! result independently.
//!
//! ```
//! use quarkflow::{frontend, pipeline};
//!
//! let traced = frontend::gen_heat1d_midpoint();
//! let (solved, dec) = pipeline::solve_and_decompose(&traced.graph, 1).unwrap();
//! assert_eq!(dec.stage_count(), 2);
//! assert_eq!(solved.objective, 4);
//! ```

pub mod catalog;
pub mod decompose;
pub mod flow;
pub mod frontend;
pub mod graph;
pub mod model;
pub mod oracle;
pub mod pipeline;
pub mod report;
pub mod verify;

use thiserror::Error;

pub use decompose::{Decomposition, DecompositionRecord, SharingReport, Stage};
pub use flow::{FlowNetwork, FlowSolution};
pub use frontend::{StencilProgram, TracedGraph};
pub use graph::{ComputationalGraph, Edge, Vertex, VertexId};
pub use model::{Assignment, DecompositionModel, ModelVar};
pub use verify::VerificationReport;

#[derive(Debug, Error)]
pub enum Error {
    #[error(transparent)]
    Graph(#[from] graph::GraphError),
    #[error(transparent)]
    Frontend(#[from] frontend::FrontendError),
    #[error(transparent)]
    Model(#[from] model::ModelError),
    #[error(transparent)]
    Flow(#[from] flow::FlowError),
    #[error(transparent)]
    Decompose(#[from] decompose::DecomposeError),
    #[error(transparent)]
    Oracle(#[from] oracle::OracleError),
    #[error(transparent)]
    Catalog(#[from] catalog::CatalogError),
    #[error("internal error: {0}")]
    Internal(String),
}
