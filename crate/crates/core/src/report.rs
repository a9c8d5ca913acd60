//! Plain-text summaries, W_K sweeps and the seeded oracle suite, shared by
//! the command-line tool, the benchmarks and the tests.

use std::fmt;
use std::time::Duration;

use crate::decompose::{sharing_report, Decomposition};
use crate::graph::{ComputationalGraph, VertexId};
use crate::oracle::{brute_force_optimum, random_graph, OracleLimits};
use crate::pipeline::{solve, solve_and_decompose, Solved};
use crate::Error;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct StageSummary {
    pub k: u32,
    pub vertices: usize,
    pub edges: usize,
    pub swept: usize,
    pub shared_out: usize,
}

/// Line-oriented `key: value` description of one decomposition.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Summary {
    pub vertices: usize,
    pub edges: usize,
    pub swept: usize,
    pub swept_depth: u32,
    pub wk: u64,
    pub stages: Vec<StageSummary>,
    pub shared_vertices: Vec<(VertexId, u32)>,
    pub shared_weight: i64,
    pub objective: i64,
    pub pivots: u64,
    /// Left out of the text when absent, so the output stays deterministic.
    pub elapsed: Option<Duration>,
}

impl Summary {
    pub fn new(graph: &ComputationalGraph, wk: u64, solved: &Solved, dec: &Decomposition) -> Result<Summary, Error> {
        let sharing = sharing_report(dec);
        Ok(Summary {
            vertices: graph.vertex_count(),
            edges: graph.edge_count(),
            swept: graph.swept_edge_count(),
            swept_depth: graph.swept_depth()?,
            wk,
            stages: dec
                .stages
                .iter()
                .map(|s| StageSummary {
                    k: s.k,
                    vertices: s.vertices.len(),
                    edges: s.edges.len(),
                    swept: s.edges.iter().filter(|e| e.swept).count(),
                    shared_out: s.shared_out.len(),
                })
                .collect(),
            shared_vertices: sharing.shared().map(|e| (e.vertex, e.weight)).collect(),
            shared_weight: sharing.total,
            objective: solved.objective,
            pivots: solved.solution.pivots,
            elapsed: None,
        })
    }
}

impl fmt::Display for Summary {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "vertices: {}", self.vertices)?;
        writeln!(f, "edges: {}", self.edges)?;
        writeln!(f, "swept edges: {}", self.swept)?;
        writeln!(f, "swept depth: {}", self.swept_depth)?;
        writeln!(f, "wk: {}", self.wk)?;
        writeln!(f, "stages: {}", self.stages.len())?;
        for s in &self.stages {
            writeln!(
                f,
                "stage {}: vertices {}, edges {}, swept {}, shared out {}",
                s.k, s.vertices, s.edges, s.swept, s.shared_out
            )?;
        }
        let shared: Vec<String> = self.shared_vertices.iter().map(|(v, w)| format!("{}(w={w})", v.0)).collect();
        writeln!(f, "shared vertices: {}", if shared.is_empty() { "none".to_string() } else { shared.join(" ") })?;
        writeln!(f, "shared weight: {}", self.shared_weight)?;
        writeln!(f, "objective: {}", self.objective)?;
        writeln!(f, "pivots: {}", self.pivots)?;
        if let Some(t) = self.elapsed {
            writeln!(f, "time ms: {:.3}", t.as_secs_f64() * 1e3)?;
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct WkRow {
    pub wk: u64,
    pub k: u32,
    pub shared_weight: i64,
    pub objective: i64,
}

/// Stage count and sharing for several values of W_K.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct WkSweep {
    pub rows: Vec<WkRow>,
}

impl WkSweep {
    /// True when K and the shared weight agree across all rows.
    pub fn stable(&self) -> bool {
        self.rows.windows(2).all(|w| (w[0].k, w[0].shared_weight) == (w[1].k, w[1].shared_weight))
    }
}

impl fmt::Display for WkSweep {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for r in &self.rows {
            writeln!(f, "wk {}: stages {}, shared weight {}, objective {}", r.wk, r.k, r.shared_weight, r.objective)?;
        }
        writeln!(f, "wk sweep: {}", if self.stable() { "unchanged" } else { "changed" })
    }
}

pub fn wk_sweep(graph: &ComputationalGraph, wks: &[u64]) -> Result<WkSweep, Error> {
    let rows = wks
        .iter()
        .map(|&wk| {
            let (solved, dec) = solve_and_decompose(graph, wk)?;
            Ok(WkRow {
                wk,
                k: dec.stage_count(),
                shared_weight: sharing_report(&dec).total,
                objective: solved.objective,
            })
        })
        .collect::<Result<Vec<_>, Error>>()?;
    Ok(WkSweep { rows })
}

pub fn median(mut times: Vec<Duration>) -> Option<Duration> {
    times.sort();
    let n = times.len();
    match n {
        0 => None,
        _ if n % 2 == 1 => Some(times[n / 2]),
        _ => Some((times[n / 2 - 1] + times[n / 2]) / 2),
    }
}

/// The random graph used for `seed` by [`oracle_suite`]: 2 to 8 vertices.
pub fn suite_graph(seed: u64) -> ComputationalGraph {
    random_graph(seed, 2 + (seed % 7) as usize, 0.4, 0.4)
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SuiteResult {
    pub total: usize,
    /// Seeds whose solver objective differs from the oracle.
    pub mismatches: Vec<u64>,
}

impl SuiteResult {
    pub fn matched(&self) -> usize {
        self.total - self.mismatches.len()
    }

    pub fn rate(&self) -> f64 {
        if self.total == 0 {
            return 1.0;
        }
        self.matched() as f64 / self.total as f64
    }
}

/// Compares solver and oracle objectives on `count` graphs starting at
/// seed `first`.
pub fn oracle_suite(first: u64, count: u64, wk: u64) -> Result<SuiteResult, Error> {
    let mut mismatches = Vec::new();
    for seed in first..first + count {
        let g = suite_graph(seed);
        let (oracle, _) = brute_force_optimum(&g, wk, OracleLimits::default())?;
        if solve(&g, wk)?.objective != oracle {
            mismatches.push(seed);
        }
    }
    Ok(SuiteResult { total: count as usize, mismatches })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::frontend::gen_heat1d_midpoint;

    #[test]
    fn summary_text() {
        let g = gen_heat1d_midpoint().graph;
        let (solved, dec) = solve_and_decompose(&g, 1).unwrap();
        let text = Summary::new(&g, 1, &solved, &dec).unwrap().to_string();
        assert!(text.contains("stages: 2\n"));
        assert!(text.contains("shared weight: 2\n"));
        assert!(text.contains("swept edges: 4\n"));
        assert!(text.contains("shared vertices: 0(w=1) 5(w=1)\n"));
        assert!(!text.contains("time ms"));
        for line in text.lines() {
            assert!(line.contains(": "), "{line}");
        }
    }

    #[test]
    fn medians() {
        let ms = |v: &[u64]| v.iter().map(|&x| Duration::from_millis(x)).collect::<Vec<_>>();
        assert_eq!(median(ms(&[])), None);
        assert_eq!(median(ms(&[5, 1, 3])), Some(Duration::from_millis(3)));
        assert_eq!(median(ms(&[4, 1, 3, 2])), Some(Duration::from_micros(2500)));
    }

    #[test]
    fn sweep_on_heat1d() {
        let s = wk_sweep(&gen_heat1d_midpoint().graph, &[1, 5]).unwrap();
        assert!(s.stable());
        assert_eq!(s.rows[1].objective, 12);
        assert!(s.to_string().ends_with("wk sweep: unchanged\n"));
    }

    #[test]
    fn suite_graphs_stay_small() {
        assert!((0..50).all(|s| suite_graph(s).vertex_count() <= 8));
        assert_eq!(suite_graph(3), suite_graph(3));
    }
}
