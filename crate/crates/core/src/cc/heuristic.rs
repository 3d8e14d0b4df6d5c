use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::{solution_from_labels, to_restricted_growth, CcSolution, WeightedSignedGraph, COST_EPS};
use crate::error::{Error, Result};

/// Greedy insertion in node order, then single-node moves until no move
/// lowers the cost. The seed only fixes the order in which nodes are
/// revisited during local search.
pub fn solve_heuristic(graph: &WeightedSignedGraph, seed: u64) -> Result<CcSolution> {
    if graph.n() == 0 {
        return Err(Error::EmptyGraph);
    }
    let labels = local_search(graph, greedy(graph), seed);
    Ok(solution_from_labels(graph, &labels, false, 0))
}

/// Cost of putting `v` in each block `0..n_blocks`, plus a fresh block at
/// index `n_blocks`, counting only pairs with nodes in `placed`.
fn placement_costs(
    graph: &WeightedSignedGraph,
    labels: &[usize],
    n_blocks: usize,
    v: usize,
    placed: impl Iterator<Item = usize>,
    costs: &mut Vec<f64>,
) {
    costs.clear();
    costs.resize(n_blocks + 1, 0.0);
    let row = graph.row(v);
    let mut pos_total = 0.0;
    for u in placed {
        if u == v {
            continue;
        }
        let w = row[u];
        if w > 0.0 {
            pos_total += w;
            costs[labels[u]] -= w;
        } else if w < 0.0 {
            costs[labels[u]] -= w;
        }
    }
    for c in costs.iter_mut() {
        *c += pos_total;
    }
}

pub(crate) fn greedy(graph: &WeightedSignedGraph) -> Vec<usize> {
    let n = graph.n();
    let mut labels = vec![0usize; n];
    let mut n_blocks = 0;
    let mut costs = Vec::new();
    for v in 0..n {
        placement_costs(graph, &labels, n_blocks, v, 0..v, &mut costs);
        // lowest index wins ties, so existing blocks beat a fresh one
        let mut best = 0;
        for b in 1..=n_blocks {
            if costs[b] < costs[best] - COST_EPS {
                best = b;
            }
        }
        labels[v] = best;
        if best == n_blocks {
            n_blocks += 1;
        }
    }
    labels
}

pub(crate) fn local_search(graph: &WeightedSignedGraph, mut labels: Vec<usize>, seed: u64) -> Vec<usize> {
    let n = graph.n();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut order: Vec<usize> = (0..n).collect();
    let mut costs = Vec::new();
    // block labels stay below n; a fresh block takes the smallest free label
    let mut sizes = vec![0usize; n + 1];
    for &l in &labels {
        sizes[l] += 1;
    }
    loop {
        order.shuffle(&mut rng);
        let mut moved = false;
        for &v in &order {
            placement_costs(graph, &labels, n, v, 0..n, &mut costs);
            let current = labels[v];
            let fresh = sizes
                .iter()
                .position(|&s| s == 0)
                .expect("fewer than n+1 blocks in use");
            let mut best = current;
            let mut best_cost = costs[current];
            for b in 0..n {
                if b != current && sizes[b] > 0 && costs[b] < best_cost - COST_EPS {
                    best = b;
                    best_cost = costs[b];
                }
            }
            if sizes[current] > 1 && costs[n] < best_cost - COST_EPS {
                best = fresh;
            }
            if best != current {
                sizes[current] -= 1;
                sizes[best] += 1;
                labels[v] = best;
                moved = true;
            }
        }
        if !moved {
            break;
        }
    }
    to_restricted_growth(&labels)
}
