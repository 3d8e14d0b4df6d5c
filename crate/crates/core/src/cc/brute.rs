use super::{solution_from_labels, CcSolution, WeightedSignedGraph, COST_EPS};
use crate::error::{Error, Result};

pub const BRUTE_FORCE_MAX_NODES: usize = 12;

/// Enumerates every set partition as a restricted-growth string, in
/// lexicographic order, and keeps the first one of least cost.
pub fn brute_force(graph: &WeightedSignedGraph) -> Result<CcSolution> {
    let n = graph.n();
    if n == 0 {
        return Err(Error::EmptyGraph);
    }
    if n > BRUTE_FORCE_MAX_NODES {
        return Err(Error::TooLarge {
            n,
            max: BRUTE_FORCE_MAX_NODES,
        });
    }

    let mut rgs = vec![0usize; n];
    let mut best = rgs.clone();
    let mut best_cost = f64::INFINITY;
    let mut visited = 0u64;
    loop {
        visited += 1;
        let cost = super::labels_cost(graph, &rgs);
        if cost < best_cost - COST_EPS {
            best_cost = cost;
            best.copy_from_slice(&rgs);
        }
        if !next_rgs(&mut rgs) {
            break;
        }
    }
    Ok(solution_from_labels(graph, &best, true, visited))
}

/// Advances to the next restricted-growth string; false after the last one.
fn next_rgs(rgs: &mut [usize]) -> bool {
    let n = rgs.len();
    for i in (1..n).rev() {
        let max_prefix = rgs[..i].iter().copied().max().unwrap_or(0);
        if rgs[i] <= max_prefix {
            rgs[i] += 1;
            for x in &mut rgs[i + 1..] {
                *x = 0;
            }
            return true;
        }
    }
    false
}
