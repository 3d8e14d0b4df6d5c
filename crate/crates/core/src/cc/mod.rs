//! Correlation clustering: find the partition of a signed graph that
//! minimizes imbalance (positive weight cut between blocks plus negative
//! weight kept inside blocks), with no preset number of blocks.
//!
//! Three solvers share the same objective and tie-break:
//!
//! * [`solve_exact`]: depth-first branch and bound over restricted-growth
//!   strings, certified optimal unless a limit stops it.
//! * [`solve_heuristic`]: greedy insertion then single-node moves.
//! * [`brute_force`]: full enumeration, the reference for small graphs.
//!
//! Among partitions whose costs agree within [`COST_EPS`], the exact solvers
//! return the one with the lexicographically least restricted-growth string
//! over ascending node ids.

mod brute;
mod exact;
mod graph;
mod heuristic;
mod partition;

use std::time::Duration;

use serde::{Deserialize, Serialize};

pub use brute::{brute_force, BRUTE_FORCE_MAX_NODES};
pub use exact::solve_exact;
pub use graph::WeightedSignedGraph;
pub use heuristic::solve_heuristic;
pub use partition::Partition;

use crate::error::{Error, Result};

/// Costs closer than this are treated as equal.
pub const COST_EPS: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CcSolution {
    pub partition: Partition,
    pub cost: f64,
    /// True only when the search finished without hitting a limit.
    pub optimal: bool,
    pub nodes_explored: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SolveLimits {
    pub time: Option<Duration>,
    pub nodes: Option<u64>,
}

impl Default for SolveLimits {
    fn default() -> Self {
        SolveLimits {
            time: Some(Duration::from_secs(60)),
            nodes: None,
        }
    }
}

impl SolveLimits {
    pub fn unlimited() -> Self {
        SolveLimits {
            time: None,
            nodes: None,
        }
    }
}

/// Total frustration of `partition` on `graph`.
pub fn imbalance(graph: &WeightedSignedGraph, partition: &Partition) -> Result<f64> {
    let labels = labels_for(graph, partition)?;
    Ok(labels_cost(graph, &labels))
}

/// Block index per node (graph order), for a partition covering exactly the graph's nodes.
pub(crate) fn labels_for(graph: &WeightedSignedGraph, partition: &Partition) -> Result<Vec<usize>> {
    let n = graph.n();
    if partition.n_members() != n {
        return Err(Error::UniverseMismatch(format!(
            "partition has {} members, graph has {} nodes",
            partition.n_members(),
            n
        )));
    }
    let mut labels = vec![usize::MAX; n];
    for (b, block) in partition.blocks().iter().enumerate() {
        for id in block {
            let i = graph
                .index_of(id)
                .ok_or_else(|| Error::UniverseMismatch(format!("{id:?} is not a graph node")))?;
            labels[i] = b;
        }
    }
    Ok(labels)
}

/// Imbalance summed over pairs `i < j` in node order.
pub(crate) fn labels_cost(graph: &WeightedSignedGraph, labels: &[usize]) -> f64 {
    let n = graph.n();
    let mut cost = 0.0;
    for i in 0..n {
        let row = graph.row(i);
        for j in i + 1..n {
            let w = row[j];
            if (w > 0.0 && labels[i] != labels[j]) || (w < 0.0 && labels[i] == labels[j]) {
                cost += w.abs();
            }
        }
    }
    cost
}

/// Relabels so that labels appear as 0, 1, 2, ... in node order.
pub(crate) fn to_restricted_growth(labels: &[usize]) -> Vec<usize> {
    let mut map = std::collections::HashMap::new();
    labels
        .iter()
        .map(|l| {
            let next = map.len();
            *map.entry(*l).or_insert(next)
        })
        .collect()
}

pub(crate) fn solution_from_labels(
    graph: &WeightedSignedGraph,
    labels: &[usize],
    optimal: bool,
    nodes_explored: u64,
) -> CcSolution {
    CcSolution {
        partition: Partition::from_labels(graph.ids(), labels),
        cost: labels_cost(graph, labels),
        optimal,
        nodes_explored,
    }
}


#[cfg(test)]
mod tests {
    use super::testgraphs::*;
    use super::*;

    #[test]
    fn imbalance_examples() {
        let g = triangle();
        let one = Partition::new(vec![vec!["a", "b", "c"]]).unwrap();
        assert_eq!(imbalance(&g, &one).unwrap(), 1.0);
        let split = Partition::new(vec![vec!["a", "b"], vec!["c"]]).unwrap();
        assert_eq!(imbalance(&g, &split).unwrap(), 1.0);
        let (g, p) = planted(10, 2, 3);
        assert_eq!(imbalance(&g, &p).unwrap(), 0.0);
    }

    #[test]
    fn imbalance_universe_mismatch() {
        let g = triangle();
        let short = Partition::new(vec![vec!["a", "b"]]).unwrap();
        assert!(matches!(imbalance(&g, &short), Err(Error::UniverseMismatch(_))));
        let wrong = Partition::new(vec![vec!["a", "b", "z"]]).unwrap();
        assert!(matches!(imbalance(&g, &wrong), Err(Error::UniverseMismatch(_))));
    }

    #[test]
    fn restricted_growth_relabel() {
        assert_eq!(to_restricted_growth(&[5, 5, 2, 7, 2]), vec![0, 0, 1, 2, 1]);
    }
}
