//! Characteristic pattern of a cluster: correlation clustering of the signed
//! consensus graph built from the cluster's patterns.

use std::collections::{BTreeMap, BTreeSet, HashMap};

use serde::{Deserialize, Serialize};

use crate::cc::{solve_exact, Partition, SolveLimits, WeightedSignedGraph};
use crate::error::{Error, Result};
use crate::ingest::{VoteMatrix, VoteValue};
use crate::metrics::Pattern;

/// Weighted signed graph where `w(u, v)` is the share of patterns placing
/// `u` and `v` together minus the share placing them apart, over the
/// patterns containing both.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConsensusGraph {
    pub graph: WeightedSignedGraph,
    /// Row-major pair support over `graph.ids()`.
    support: Vec<u32>,
    /// Patterns each voter appears in, by graph index.
    pub appearances: Vec<u32>,
    pub n_patterns: usize,
}

impl ConsensusGraph {
    pub fn support(&self, i: usize, j: usize) -> u32 {
        self.support[i * self.graph.n() + j]
    }

    pub fn support_by_id(&self, u: &str, v: &str) -> Option<u32> {
        Some(self.support(self.graph.index_of(u)?, self.graph.index_of(v)?))
    }

    pub fn weight_by_id(&self, u: &str, v: &str) -> Option<f64> {
        Some(self.graph.weight(self.graph.index_of(u)?, self.graph.index_of(v)?))
    }
}

pub fn consensus_graph(patterns: &[&Pattern]) -> Result<ConsensusGraph> {
    if patterns.is_empty() {
        return Err(Error::EmptyCluster);
    }
    let ids: BTreeSet<&str> = patterns.iter().flat_map(|p| p.partition.members()).collect();
    let mut graph = WeightedSignedGraph::new(ids.iter().copied())?;
    let n = graph.n();
    let mut support = vec![0u32; n * n];
    let mut together = vec![0u32; n * n];
    let mut appearances = vec![0u32; n];
    for p in patterns {
        let members: Vec<(usize, usize)> = p
            .partition
            .blocks()
            .iter()
            .enumerate()
            .flat_map(|(b, block)| block.iter().map(move |id| (b, id)))
            .map(|(b, id)| (graph.index_of(id).expect("member of the union"), b))
            .collect();
        for (x, &(i, bi)) in members.iter().enumerate() {
            appearances[i] += 1;
            for &(j, bj) in &members[x + 1..] {
                support[i * n + j] += 1;
                support[j * n + i] += 1;
                if bi == bj {
                    together[i * n + j] += 1;
                    together[j * n + i] += 1;
                }
            }
        }
    }
    for i in 0..n {
        for j in i + 1..n {
            let s = support[i * n + j];
            if s == 0 {
                continue;
            }
            let t = together[i * n + j] as f64;
            let apart = s as f64 - t;
            let w = (t - apart) / s as f64;
            if w != 0.0 {
                graph.set_weight_idx(i, j, w)?;
            }
        }
    }
    Ok(ConsensusGraph {
        graph,
        support,
        appearances,
        n_patterns: patterns.len(),
    })
}

/// Drops voters appearing in fewer than `threshold` × (cluster size)
/// patterns. Returns the reduced graph and the dropped ids.
pub fn filter_low_participation(consensus: &ConsensusGraph, threshold: f64) -> Result<(ConsensusGraph, Vec<String>)> {
    if !(threshold > 0.0 && threshold <= 1.0) {
        return Err(Error::OutOfRange("participation threshold", threshold.to_string()));
    }
    let needed = threshold * consensus.n_patterns as f64;
    let ids = consensus.graph.ids();
    let (keep, drop): (Vec<usize>, Vec<usize>) =
        (0..ids.len()).partition(|&i| consensus.appearances[i] as f64 >= needed);
    if keep.is_empty() {
        return Err(Error::EmptyConsensus);
    }
    let excluded: Vec<String> = drop.iter().map(|&i| ids[i].clone()).collect();
    if !excluded.is_empty() {
        log::info!(
            "excluded {} low-participation voters: {}",
            excluded.len(),
            excluded.join(",")
        );
    }
    let mut graph = WeightedSignedGraph::new(keep.iter().map(|&i| ids[i].clone()))?;
    let n_old = ids.len();
    let m = keep.len();
    let mut support = vec![0u32; m * m];
    // keep preserves id order, so new index x maps to old index keep[x]
    for (x, &i) in keep.iter().enumerate() {
        for (y, &j) in keep.iter().enumerate() {
            support[x * m + y] = consensus.support[i * n_old + j];
            if x < y {
                let w = consensus.graph.weight(i, j);
                if w != 0.0 {
                    graph.set_weight_idx(x, y, w)?;
                }
            }
        }
    }
    Ok((
        ConsensusGraph {
            graph,
            support,
            appearances: keep.iter().map(|&i| consensus.appearances[i]).collect(),
            n_patterns: consensus.n_patterns,
        },
        excluded,
    ))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CharacteristicPattern {
    /// Cluster number, from 1.
    pub cluster: usize,
    pub rollcalls: Vec<String>,
    pub partition: Partition,
    pub excluded: Vec<String>,
    pub cost: f64,
    /// False when the solver stopped on a limit; the partition is then its best incumbent.
    pub optimal: bool,
    pub nodes_explored: u64,
}

pub fn characteristic_pattern(
    cluster: usize,
    patterns: &[&Pattern],
    threshold: f64,
    limits: SolveLimits,
) -> Result<(CharacteristicPattern, ConsensusGraph)> {
    let full = consensus_graph(patterns)?;
    let (consensus, excluded) = filter_low_participation(&full, threshold)?;
    let solution = solve_exact(&consensus.graph, limits)?;
    if !solution.optimal {
        log::warn!(
            "cluster {cluster}: consensus solve stopped on a limit after {} nodes; keeping incumbent of cost {}",
            solution.nodes_explored,
            solution.cost
        );
    }
    Ok((
        CharacteristicPattern {
            cluster,
            rollcalls: patterns.iter().map(|p| p.rollcall_id.clone()).collect(),
            partition: solution.partition,
            excluded,
            cost: solution.cost,
            optimal: solution.optimal,
            nodes_explored: solution.nodes_explored,
        },
        consensus,
    ))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AbstentionistRule {
    /// A member counts as an abstainer above this share of the cluster's roll-calls.
    pub rollcall_share: f64,
    /// A faction is flagged above this share of abstaining members.
    pub member_share: f64,
}

impl Default for AbstentionistRule {
    fn default() -> Self {
        AbstentionistRule {
            rollcall_share: 0.5,
            member_share: 0.5,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FactionSummary {
    /// Faction number within the pattern, from 1.
    pub faction: usize,
    pub size: usize,
    pub groups: BTreeMap<String, usize>,
    pub abstentionist: bool,
}

/// Political-group composition of each faction, with the abstentionist flag.
/// Voters missing from the matrix are counted under the group `"?"`.
pub fn summarize_pattern(
    cp: &CharacteristicPattern,
    matrix: &VoteMatrix,
    rule: AbstentionistRule,
) -> Vec<FactionSummary> {
    let voter_idx: HashMap<&str, usize> = matrix
        .voters()
        .iter()
        .enumerate()
        .map(|(i, v)| (v.id.as_str(), i))
        .collect();
    let rollcalls: Vec<usize> = cp.rollcalls.iter().filter_map(|r| matrix.rollcall_index(r)).collect();
    cp.partition
        .blocks()
        .iter()
        .enumerate()
        .map(|(f, block)| {
            let mut groups = BTreeMap::new();
            let mut abstainers = 0;
            for id in block {
                let Some(&vi) = voter_idx.get(id.as_str()) else {
                    *groups.entry("?".to_string()).or_default() += 1;
                    continue;
                };
                *groups.entry(matrix.voters()[vi].group.clone()).or_default() += 1;
                let abstained = rollcalls
                    .iter()
                    .filter(|&&r| matrix.vote(vi, r) == VoteValue::Abstain)
                    .count();
                if !rollcalls.is_empty() && abstained as f64 / rollcalls.len() as f64 > rule.rollcall_share {
                    abstainers += 1;
                }
            }
            FactionSummary {
                faction: f + 1,
                size: block.len(),
                groups,
                abstentionist: abstainers as f64 / block.len() as f64 > rule.member_share,
            }
        })
        .collect()
}
