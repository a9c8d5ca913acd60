//! Primal network simplex, exact integer arithmetic.
//!
//! Uncapacitated arcs only: each free arc is split into an antiparallel
//! pair, so every internal arc has lower bound 0. An artificial root with
//! one big-cost arc per node gives the initial basis. Cunningham's
//! last-blocking-arc rule keeps the tree strongly feasible, which rules out
//! cycling on degenerate pivots.

use super::{FlowError, FlowNetwork, FlowSolution, LowerBound};

#[derive(Clone, Copy, PartialEq, Eq)]
enum Dir {
    /// Tree arc points from the node to its parent.
    Up,
    /// Tree arc points from the parent to the node.
    Down,
}

struct Simplex {
    src: Vec<usize>,
    dst: Vec<usize>,
    cost: Vec<i64>,
    flow: Vec<i64>,
    in_tree: Vec<bool>,
    parent: Vec<usize>,
    pred: Vec<usize>,
    dir: Vec<Dir>,
    depth: Vec<usize>,
    children: Vec<Vec<usize>>,
    pi: Vec<i64>,
    root: usize,
    real_arcs: usize,
    next_block: usize,
}

impl Simplex {
    fn reduced(&self, a: usize) -> i64 {
        self.cost[a] - self.pi[self.src[a]] + self.pi[self.dst[a]]
    }

    /// Block-search pricing: most negative reduced cost within the first
    /// block that has one, scanning arcs cyclically from where the last
    /// search stopped.
    fn entering(&mut self) -> Option<usize> {
        let m = self.src.len();
        let block = ((m as f64).sqrt() as usize).max(10);
        let mut best: Option<(i64, usize)> = None;
        let mut a = self.next_block;
        for scanned in 1..=m {
            if !self.in_tree[a] {
                let rc = self.reduced(a);
                if rc < 0 && best.is_none_or(|(b, _)| rc < b) {
                    best = Some((rc, a));
                }
            }
            a = if a + 1 == m { 0 } else { a + 1 };
            if scanned % block == 0 && best.is_some() {
                break;
            }
        }
        self.next_block = a;
        best.map(|(_, a)| a)
    }

    /// Nodes from `x` up to (excluding) `stop`.
    fn path_to(&self, mut x: usize, stop: usize) -> Vec<usize> {
        let mut out = Vec::new();
        while x != stop {
            out.push(x);
            x = self.parent[x];
        }
        out
    }

    fn join(&self, mut u: usize, mut v: usize) -> usize {
        while u != v {
            if self.depth[u] >= self.depth[v] {
                u = self.parent[u];
            } else {
                v = self.parent[v];
            }
        }
        u
    }

    fn pivot(&mut self, entering: usize) -> Result<(), FlowError> {
        let (u, v) = (self.src[entering], self.dst[entering]);
        let apex = self.join(u, v);
        let u_side = self.path_to(u, apex);
        let v_side = self.path_to(v, apex);

        // Cycle orientation: apex down to u, across the entering arc, v up
        // to apex. On the u side a tree arc is traversed forward if it
        // points down; on the v side if it points up.
        let mut order: Vec<(usize, bool)> = Vec::with_capacity(u_side.len() + v_side.len());
        order.extend(u_side.iter().rev().map(|&x| (x, self.dir[x] == Dir::Down)));
        order.extend(v_side.iter().map(|&x| (x, self.dir[x] == Dir::Up)));

        let delta = order.iter().filter(|(_, fwd)| !fwd).map(|&(x, _)| self.flow[self.pred[x]]).min();
        let Some(delta) = delta else {
            return Err(FlowError::NegativeCostCycle { arc: entering });
        };
        let leaving_node = order
            .iter()
            .rev()
            .find(|&&(x, fwd)| !fwd && self.flow[self.pred[x]] == delta)
            .map(|&(x, _)| x)
            .expect("a blocking arc exists");

        if delta > 0 {
            for &(x, fwd) in &order {
                let a = self.pred[x];
                self.flow[a] += if fwd { delta } else { -delta };
            }
            self.flow[entering] += delta;
        }

        let leaving = self.pred[leaving_node];
        self.in_tree[leaving] = false;
        self.in_tree[entering] = true;

        // Re-hang the detached subtree from the entering arc's endpoint.
        let on_u_side = u_side.contains(&leaving_node);
        let (start, new_parent, start_dir) = if on_u_side { (u, v, Dir::Up) } else { (v, u, Dir::Down) };
        let path = self.path_to(start, self.parent[leaving_node]);
        let old_pred: Vec<(usize, usize, Dir)> =
            path.iter().map(|&x| (self.parent[x], self.pred[x], self.dir[x])).collect();
        for (&x, &(p, _, _)) in path.iter().zip(&old_pred) {
            let kids = &mut self.children[p];
            let at = kids.iter().position(|&c| c == x).expect("child listed under its parent");
            kids.swap_remove(at);
        }
        self.set_parent(start, new_parent, entering, start_dir);
        for i in 1..path.len() {
            let (_, arc, dir) = old_pred[i - 1];
            let flipped = if dir == Dir::Up { Dir::Down } else { Dir::Up };
            self.set_parent(path[i], path[i - 1], arc, flipped);
        }
        self.refresh_subtree(start);
        Ok(())
    }

    fn set_parent(&mut self, x: usize, p: usize, arc: usize, dir: Dir) {
        self.parent[x] = p;
        self.pred[x] = arc;
        self.dir[x] = dir;
        self.children[p].push(x);
    }

    fn refresh_subtree(&mut self, top: usize) {
        let mut stack = vec![top];
        while let Some(x) = stack.pop() {
            let p = self.parent[x];
            let a = self.pred[x];
            self.depth[x] = self.depth[p] + 1;
            self.pi[x] = match self.dir[x] {
                Dir::Up => self.cost[a] + self.pi[p],
                Dir::Down => self.pi[p] - self.cost[a],
            };
            stack.extend(self.children[x].iter().copied());
        }
    }
}

/// Solves the min-cost flow problem exactly.
///
/// Pivots are capped at `50 * arcs^2`. Potentials are returned with the
/// ground node (index 0) at 0.
pub fn solve_mcnf(net: &FlowNetwork) -> Result<FlowSolution, FlowError> {
    let total: i64 = net.nodes.iter().map(|n| n.supply).sum();
    if total != 0 {
        return Err(FlowError::Unbalanced(total));
    }
    let n = net.nodes.len();
    let root = n;

    // internal arc list: network arcs, reverse twins of free arcs, artificials
    let mut src = Vec::new();
    let mut dst = Vec::new();
    let mut cost = Vec::new();
    let mut twin_of = Vec::new();
    for a in &net.arcs {
        src.push(a.from);
        dst.push(a.to);
        cost.push(a.cost);
    }
    for (i, a) in net.arcs.iter().enumerate() {
        if a.lower == LowerBound::Free {
            src.push(a.to);
            dst.push(a.from);
            cost.push(-a.cost);
            twin_of.push(i);
        }
    }
    let real_arcs = src.len();
    let max_cost = cost.iter().map(|c: &i64| c.abs()).max().unwrap_or(0);
    let big = (n as i64 + 1) * (max_cost + 1);

    let mut s = Simplex {
        flow: vec![0; real_arcs + n],
        in_tree: vec![false; real_arcs + n],
        parent: vec![root; n + 1],
        pred: vec![usize::MAX; n + 1],
        dir: vec![Dir::Down; n + 1],
        depth: vec![0; n + 1],
        children: vec![Vec::new(); n + 1],
        pi: vec![0; n + 1],
        root,
        real_arcs,
        next_block: 0,
        src,
        dst,
        cost,
    };
    for (i, node) in net.nodes.iter().enumerate() {
        let a = real_arcs + i;
        // zero-supply nodes hang below the root so the zero-flow arc points away from it
        if node.supply > 0 {
            s.src.push(i);
            s.dst.push(root);
            s.dir[i] = Dir::Up;
            s.pi[i] = big;
        } else {
            s.src.push(root);
            s.dst.push(i);
            s.dir[i] = Dir::Down;
            s.pi[i] = -big;
        }
        s.cost.push(big);
        s.flow[a] = node.supply.abs();
        s.in_tree[a] = true;
        s.pred[i] = a;
        s.depth[i] = 1;
        s.children[root].push(i);
    }

    let cap = 50u64.saturating_mul((net.arcs.len() as u64).pow(2)).max(1000);
    let mut pivots = 0u64;
    while let Some(a) = s.entering() {
        if pivots == cap {
            return Err(FlowError::NonConvergence(pivots));
        }
        s.pivot(a)?;
        pivots += 1;
    }

    let stranded: i64 = s.flow[s.real_arcs..].iter().sum();
    if stranded != 0 {
        return Err(FlowError::Infeasible(stranded));
    }
    debug_assert_eq!(s.parent[s.root], s.root);

    let mut flows = s.flow[..net.arcs.len()].to_vec();
    for (k, &i) in twin_of.iter().enumerate() {
        flows[i] -= s.flow[net.arcs.len() + k];
    }
    let ground = s.pi[0];
    let potentials: Vec<i64> = s.pi[..n].iter().map(|p| p - ground).collect();
    let cost = net.arcs.iter().zip(&flows).map(|(a, x)| a.cost * x).sum();
    Ok(FlowSolution { flows, potentials, cost, pivots })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::flow::{FlowArc, FlowNode};
    use crate::model::{Family, ModelVar};

    fn net(supplies: &[i64], arcs: &[(usize, usize, i64, LowerBound)]) -> FlowNetwork {
        FlowNetwork {
            nodes: supplies
                .iter()
                .enumerate()
                .map(|(i, &supply)| FlowNode { var: ModelVar::from_index(i), supply })
                .collect(),
            arcs: arcs
                .iter()
                .map(|&(from, to, cost, lower)| FlowArc { from, to, cost, lower, family: Family::Lifetime })
                .collect(),
        }
    }

    #[test]
    fn forced_flow() {
        let n = net(&[1, -1], &[(0, 1, 3, LowerBound::Zero)]);
        let s = solve_mcnf(&n).unwrap();
        assert_eq!(s.flows, vec![1]);
        assert_eq!(s.cost, 3);
        assert_eq!(s.potentials[0] - s.potentials[1], 3);
        assert!(s.check_optimality(&n).is_empty());
    }

    #[test]
    fn cheaper_path_wins() {
        let n = net(
            &[2, 0, 0, -2],
            &[
                (0, 3, 5, LowerBound::Zero),
                (0, 1, 1, LowerBound::Zero),
                (1, 2, 1, LowerBound::Zero),
                (2, 3, 1, LowerBound::Zero),
            ],
        );
        let s = solve_mcnf(&n).unwrap();
        assert_eq!(s.flows, vec![0, 2, 2, 2]);
        assert_eq!(s.cost, 6);
        assert!(s.check_optimality(&n).is_empty());
    }

    #[test]
    fn free_arc_carries_negative_flow() {
        let n = net(&[-1, 1], &[(0, 1, 2, LowerBound::Free)]);
        let s = solve_mcnf(&n).unwrap();
        assert_eq!(s.flows, vec![-1]);
        assert_eq!(s.cost, -2);
        assert_eq!(s.potentials[0] - s.potentials[1], 2);
        assert!(s.check_optimality(&n).is_empty());
    }

    #[test]
    fn errors() {
        assert_eq!(solve_mcnf(&net(&[1, 0], &[])), Err(FlowError::Unbalanced(1)));
        let cyc = net(&[0, 0], &[(0, 1, -1, LowerBound::Zero), (1, 0, 0, LowerBound::Zero)]);
        assert!(matches!(solve_mcnf(&cyc), Err(FlowError::NegativeCostCycle { .. })));
        assert!(matches!(solve_mcnf(&net(&[1, -1], &[])), Err(FlowError::Infeasible(2))));
    }
}
