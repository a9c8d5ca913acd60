//! Stencil update formulas: a small DSL, an operator-overloading tracer, and
//! the lowering of both into a [`ComputationalGraph`](crate::graph::ComputationalGraph).
//!
//! Expressions live in a hash-consed arena, so structurally equal
//! subexpressions are one node and therefore one graph vertex. Scalar
//! constants fold into the operation that consumes them and never become
//! vertices.

mod examples;
mod expr;
mod parser;
mod trace;

use thiserror::Error;

pub use examples::{
    gen_euler3d_rk4, gen_heat1d_midpoint, gen_heat3d_midpoint, HEAT1D_MIDPOINT_SOURCE, HEAT3D_MIDPOINT_SOURCE,
};
pub use expr::{format_scalar, parse_scalar, BinOp, ExprArena, ExprId, Scalar, Shift, StencilExpr, Sym, Tracer};
pub use parser::parse;
pub use trace::{trace, Operand, TracedGraph, VertexOp};

use std::collections::HashMap;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum FrontendError {
    #[error("line {line}, column {column}: {message}")]
    Parse { line: usize, column: usize, message: String },
    #[error("line {line}: unknown name `{name}`")]
    UnknownName { name: String, line: usize },
    #[error("division by the constant zero")]
    DivisionByZeroConstant,
    #[error("name `{0}` is defined twice")]
    DuplicateName(String),
    #[error("output `{0}` folds to a constant and has no grid value")]
    ConstantOutput(String),
    #[error("output `{0}` is also an operand of another value; outputs must be final")]
    OutputConsumed(String),
    #[error("input `{0}` has weight 0; weight must be >= 1")]
    ZeroWeight(String),
    #[error("program declares no inputs")]
    MissingInput,
    #[error("program declares no outputs")]
    MissingOutput,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct InputDecl {
    pub name: String,
    pub weight: u32,
    pub expr: ExprId,
}

/// A checked update formula: named inputs, ordered `let` bindings and named
/// outputs, all pointing into one hash-consed arena.
#[derive(Clone, Debug)]
pub struct StencilProgram {
    pub arena: ExprArena,
    pub inputs: Vec<InputDecl>,
    pub lets: Vec<(String, ExprId)>,
    pub outputs: Vec<(String, ExprId)>,
}

/// Incrementally assembles a [`StencilProgram`], enforcing name rules.
#[derive(Default, Debug)]
pub struct ProgramBuilder {
    pub arena: ExprArena,
    inputs: Vec<InputDecl>,
    lets: Vec<(String, ExprId)>,
    outputs: Vec<(String, ExprId)>,
    names: HashMap<String, ExprId>,
}

impl ProgramBuilder {
    pub fn new() -> Self {
        Self::default()
    }

    fn claim(&mut self, name: &str, id: ExprId) -> Result<(), FrontendError> {
        if self.names.insert(name.to_string(), id).is_some() {
            return Err(FrontendError::DuplicateName(name.to_string()));
        }
        Ok(())
    }

    pub fn input(&mut self, name: &str, weight: u32) -> Result<ExprId, FrontendError> {
        if weight == 0 {
            return Err(FrontendError::ZeroWeight(name.to_string()));
        }
        let slot = u32::try_from(self.inputs.len()).expect("input count fits u32");
        let id = self.arena.input(slot);
        self.claim(name, id)?;
        self.inputs.push(InputDecl { name: name.to_string(), weight, expr: id });
        Ok(id)
    }

    pub fn bind(&mut self, name: &str, expr: ExprId) -> Result<(), FrontendError> {
        self.claim(name, expr)?;
        self.lets.push((name.to_string(), expr));
        Ok(())
    }

    /// Outputs are not referenceable by later declarations.
    pub fn output(&mut self, name: &str, expr: ExprId) -> Result<(), FrontendError> {
        if self.names.contains_key(name) || self.outputs.iter().any(|(n, _)| n == name) {
            return Err(FrontendError::DuplicateName(name.to_string()));
        }
        self.outputs.push((name.to_string(), expr));
        Ok(())
    }

    pub fn lookup(&self, name: &str) -> Option<ExprId> {
        self.names.get(name).copied()
    }

    pub fn finish(self) -> Result<StencilProgram, FrontendError> {
        if self.inputs.is_empty() {
            return Err(FrontendError::MissingInput);
        }
        if self.outputs.is_empty() {
            return Err(FrontendError::MissingOutput);
        }
        for (name, id) in &self.outputs {
            if self.arena.is_const(*id) {
                return Err(FrontendError::ConstantOutput(name.clone()));
            }
        }
        let reachable = self.arena.reachable(self.outputs.iter().map(|(_, id)| *id));
        let mut consumed = vec![false; self.arena.len()];
        for (i, node) in self.arena.nodes().iter().enumerate() {
            if reachable[i] {
                for c in node.children() {
                    consumed[c.index()] = true;
                }
            }
        }
        if let Some((name, _)) = self.outputs.iter().find(|(_, id)| consumed[id.index()]) {
            return Err(FrontendError::OutputConsumed(name.clone()));
        }
        Ok(StencilProgram { arena: self.arena, inputs: self.inputs, lets: self.lets, outputs: self.outputs })
    }
}
