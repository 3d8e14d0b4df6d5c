use std::time::Instant;

use super::heuristic::{greedy, local_search};
use super::{labels_cost, solution_from_labels, CcSolution, SolveLimits, WeightedSignedGraph, COST_EPS};
use crate::error::{Error, Result};

/// Branch and bound over restricted-growth assignments in node order.
///
/// Node `d` is placed into one of the blocks opened by nodes `0..d` or into a
/// new block, in that order, so leaves are visited in lexicographic order.
/// The lower bound adds to the cost already fixed, for every unplaced node,
/// its cheapest placement with respect to the placed nodes only.
///
/// The search starts from the heuristic solution as an upper bound. Subtrees
/// are cut when their bound exceeds that cost; once the search itself has
/// reached a leaf, subtrees that cannot strictly improve on it are cut too.
pub fn solve_exact(graph: &WeightedSignedGraph, limits: SolveLimits) -> Result<CcSolution> {
    let n = graph.n();
    if n == 0 {
        return Err(Error::EmptyGraph);
    }
    let start = local_search(graph, greedy(graph), 0);
    let start_cost = labels_cost(graph, &start);

    let mut search = Search {
        graph,
        n,
        limits,
        started: Instant::now(),
        labels: vec![0; n],
        pos_total: vec![0.0; n],
        pos_in: vec![0.0; n * n],
        neg_in: vec![0.0; n * n],
        best: start,
        best_cost: start_cost,
        found: false,
        nodes: 0,
        aborted: false,
        choice_costs: vec![Vec::new(); n],
    };
    search.descend(0, 0, 0.0);

    let optimal = !search.aborted;
    Ok(solution_from_labels(graph, &search.best, optimal, search.nodes))
}

struct Search<'g> {
    graph: &'g WeightedSignedGraph,
    n: usize,
    limits: SolveLimits,
    started: Instant,
    labels: Vec<usize>,
    /// Positive weight from each node to all placed nodes.
    pos_total: Vec<f64>,
    /// `pos_in[v * n + b]`: positive weight from `v` to placed members of block `b`.
    pos_in: Vec<f64>,
    /// `neg_in[v * n + b]`: absolute negative weight from `v` to placed members of block `b`.
    neg_in: Vec<f64>,
    best: Vec<usize>,
    best_cost: f64,
    /// Whether `best` came from a leaf of this search rather than the heuristic.
    found: bool,
    nodes: u64,
    aborted: bool,
    choice_costs: Vec<Vec<f64>>,
}

impl Search<'_> {
    fn out_of_budget(&mut self) -> bool {
        if self.aborted {
            return true;
        }
        if self.limits.nodes.is_some_and(|max| self.nodes >= max) {
            self.aborted = true;
        } else if self.nodes % 1024 == 1 {
            if let Some(t) = self.limits.time {
                if self.started.elapsed() >= t {
                    self.aborted = true;
                }
            }
        }
        self.aborted
    }

    /// True when no completion of a subtree with this bound should be explored.
    fn cut(&self, bound: f64) -> bool {
        if self.found {
            bound >= self.best_cost - COST_EPS
        } else {
            bound > self.best_cost + COST_EPS
        }
    }

    #[inline]
    fn placement_cost(&self, v: usize, block: usize) -> f64 {
        self.pos_total[v] - self.pos_in[v * self.n + block] + self.neg_in[v * self.n + block]
    }

    fn apply(&mut self, d: usize, block: usize, sign: f64) {
        let n = self.n;
        let row = self.graph.row(d);
        for v in d + 1..n {
            let w = row[v];
            if w > 0.0 {
                self.pos_total[v] += sign * w;
                self.pos_in[v * n + block] += sign * w;
            } else if w < 0.0 {
                self.neg_in[v * n + block] -= sign * w;
            }
        }
    }

    fn remaining_bound(&self, from: usize, n_blocks: usize) -> f64 {
        let mut total = 0.0;
        for v in from..self.n {
            let mut m = self.pos_total[v];
            for b in 0..n_blocks {
                let c = self.placement_cost(v, b);
                if c < m {
                    m = c;
                }
            }
            total += m;
        }
        total
    }

    fn descend(&mut self, d: usize, n_blocks: usize, fixed: f64) {
        let mut costs = std::mem::take(&mut self.choice_costs[d]);
        costs.clear();
        costs.extend((0..n_blocks).map(|b| self.placement_cost(d, b)));
        costs.push(self.pos_total[d]);

        for block in 0..=n_blocks {
            if self.aborted {
                break;
            }
            let fixed_here = fixed + costs[block];
            if self.cut(fixed_here) {
                continue;
            }
            self.nodes += 1;
            if self.out_of_budget() {
                break;
            }
            self.labels[d] = block;
            let blocks_here = n_blocks.max(block + 1);
            if d + 1 == self.n {
                if (!self.found && fixed_here <= self.best_cost + COST_EPS) || fixed_here < self.best_cost - COST_EPS {
                    self.best.copy_from_slice(&self.labels);
                    self.best_cost = fixed_here;
                    self.found = true;
                }
                continue;
            }
            self.apply(d, block, 1.0);
            let bound = fixed_here + self.remaining_bound(d + 1, blocks_here);
            if !self.cut(bound) {
                self.descend(d + 1, blocks_here, fixed_here);
            }
            self.apply(d, block, -1.0);
        }
        self.choice_costs[d] = costs;
    }
}

#[cfg(test)]
mod tests {
    use super::super::testgraphs::*;
    use super::super::{brute_force, imbalance, Partition};
    use super::*;
    use std::time::Duration;

    #[test]
    fn unbalanced_triangle() {
        let s = solve_exact(&triangle(), SolveLimits::unlimited()).unwrap();
        assert_eq!(s.cost, 1.0);
        assert!(s.optimal);
        assert_eq!(s, brute_force(&triangle()).unwrap().with_nodes(s.nodes_explored));
    }

    #[test]
    fn all_positive_k4() {
        let ids = ["a", "b", "c", "d"];
        let mut g = WeightedSignedGraph::new(ids).unwrap();
        for i in 0..4 {
            for j in i + 1..4 {
                g.set_weight_idx(i, j, 1.0).unwrap();
            }
        }
        let s = solve_exact(&g, SolveLimits::default()).unwrap();
        assert_eq!(s.cost, 0.0);
        assert_eq!(s.partition, Partition::new(vec![ids.to_vec()]).unwrap());
    }

    #[test]
    fn matches_brute_force_n8() {
        for seed in 0..30 {
            let g = random(8, 0.7, seed);
            let e = solve_exact(&g, SolveLimits::unlimited()).unwrap();
            let b = brute_force(&g).unwrap();
            assert_eq!(e.cost, b.cost, "seed {seed}");
            assert_eq!(e.partition, b.partition, "seed {seed}");
            assert!(e.optimal);
        }
    }

    #[test]
    fn ties_resolve_like_brute_force() {
        // an edgeless graph: every partition costs 0, least rgs is one block
        let g = WeightedSignedGraph::new(ids(5)).unwrap();
        let e = solve_exact(&g, SolveLimits::unlimited()).unwrap();
        assert_eq!(e.partition.n_blocks(), 1);
        // symmetric square of negative edges with ties everywhere
        let g = WeightedSignedGraph::from_edges(
            ["a", "b", "c", "d"],
            &[("a", "b", -1.0), ("b", "c", -1.0), ("c", "d", -1.0), ("a", "d", -1.0)],
        )
        .unwrap();
        let e = solve_exact(&g, SolveLimits::unlimited()).unwrap();
        let b = brute_force(&g).unwrap();
        assert_eq!(e.partition, b.partition);
        assert_eq!(
            e.partition,
            Partition::new(vec![vec!["a", "c"], vec!["b", "d"]]).unwrap()
        );
    }

    #[test]
    fn planted_balanced_recovered() {
        for seed in 0..5 {
            let (g, p) = planted(30, 3, seed);
            let s = solve_exact(&g, SolveLimits::default()).unwrap();
            assert_eq!(s.cost, 0.0);
            assert_eq!(s.partition, p);
            assert!(s.optimal);
        }
    }

    #[test]
    fn node_limit_returns_incumbent() {
        let g = random(12, 0.9, 4);
        let s = solve_exact(
            &g,
            SolveLimits {
                time: None,
                nodes: Some(5),
            },
        )
        .unwrap();
        assert!(!s.optimal);
        assert!(s.nodes_explored <= 5);
        assert_eq!(s.cost, imbalance(&g, &s.partition).unwrap());
    }

    #[test]
    fn time_limit_flag() {
        let g = random(40, 1.0, 9);
        let s = solve_exact(
            &g,
            SolveLimits {
                time: Some(Duration::from_millis(0)),
                nodes: None,
            },
        )
        .unwrap();
        assert!(!s.optimal);
    }

    impl CcSolution {
        fn with_nodes(mut self, nodes: u64) -> Self {
            self.nodes_explored = nodes;
            self
        }
    }
}
