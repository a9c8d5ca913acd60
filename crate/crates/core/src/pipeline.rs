use crate::decompose::{decompose, Decomposition};
use crate::flow::{build_network, extract_assignment, solve_mcnf, FlowNetwork, FlowSolution};
use crate::graph::ComputationalGraph;
use crate::model::{build_model, Assignment, DecompositionModel};
use crate::Error;

/// Every intermediate product of one optimal decomposition.
#[derive(Clone, Debug)]
pub struct Solved {
    pub model: DecompositionModel,
    pub network: FlowNetwork,
    pub solution: FlowSolution,
    pub assignment: Assignment,
    pub objective: i64,
}

/// Model, network, solve, extract. The extracted assignment is checked
/// against the model before it is returned.
pub fn solve(graph: &ComputationalGraph, wk: u64) -> Result<Solved, Error> {
    let model = build_model(graph, wk)?;
    let network = build_network(&model);
    let solution = solve_mcnf(&network)?;
    let assignment = extract_assignment(&network, &solution)?;
    let violations = model.check_feasible(&assignment)?;
    if !violations.is_empty() {
        return Err(Error::Internal(format!(
            "solver assignment violates {} constraint(s), first: {}",
            violations.len(),
            violations[0]
        )));
    }
    let objective = model.objective_value(&assignment)?;
    Ok(Solved { model, network, solution, assignment, objective })
}

pub fn solve_and_decompose(graph: &ComputationalGraph, wk: u64) -> Result<(Solved, Decomposition), Error> {
    let solved = solve(graph, wk)?;
    let dec = decompose(graph, &solved.assignment)?;
    Ok((solved, dec))
}
