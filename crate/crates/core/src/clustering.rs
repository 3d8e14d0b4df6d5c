//! k-medoids over a precomputed dissimilarity matrix, silhouette scoring,
//! and a sweep over k.

use std::collections::BTreeMap;
use std::path::Path;

use rand::seq::index::sample;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::metrics::DissimilarityMatrix;

const SWAP_EPS: f64 = 1e-12;

/// A partition of the patterns of a dissimilarity matrix.
///
/// Clusters are numbered from 0 by size descending, then by their first
/// pattern in matrix order. Exports number them from 1.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Clustering {
    pub k: usize,
    /// Cluster of each pattern, in matrix order.
    pub labels: Vec<usize>,
    /// Matrix index of each cluster's medoid.
    pub medoids: Vec<usize>,
    /// Sum of dissimilarities from each pattern to its medoid.
    pub cost: f64,
}

impl Clustering {
    pub fn sizes(&self) -> Vec<usize> {
        let mut sizes = vec![0; self.k];
        for &l in &self.labels {
            sizes[l] += 1;
        }
        sizes
    }

    pub fn members(&self, cluster: usize) -> Vec<usize> {
        (0..self.labels.len()).filter(|&i| self.labels[i] == cluster).collect()
    }

    /// Builds a clustering from labels and medoids, then renumbers clusters canonically.
    pub fn from_parts(labels: Vec<usize>, medoids: Vec<usize>, cost: f64) -> Result<Self> {
        let k = medoids.len();
        let mut sizes = vec![0usize; k];
        let mut first = vec![usize::MAX; k];
        for (i, &l) in labels.iter().enumerate() {
            if l >= k {
                return Err(Error::OutOfRange("cluster label", l.to_string()));
            }
            sizes[l] += 1;
            first[l] = first[l].min(i);
        }
        if sizes.contains(&0) {
            return Err(Error::Config("empty cluster in clustering".into()));
        }
        for (c, &m) in medoids.iter().enumerate() {
            if labels.get(m) != Some(&c) {
                return Err(Error::Config(format!("medoid {m} is not in its own cluster")));
            }
        }
        let mut order: Vec<usize> = (0..k).collect();
        order.sort_by(|&a, &b| sizes[b].cmp(&sizes[a]).then(first[a].cmp(&first[b])));
        let mut rank = vec![0; k];
        for (new, &old) in order.iter().enumerate() {
            rank[old] = new;
        }
        Ok(Clustering {
            k,
            labels: labels.iter().map(|&l| rank[l]).collect(),
            medoids: order.iter().map(|&old| medoids[old]).collect(),
            cost,
        })
    }
}

/// Nearest and second-nearest medoid slot for one point.
#[derive(Debug, Clone, Copy)]
struct Near {
    slot: usize,
    d: f64,
    second: f64,
}

fn nearest(d: &DissimilarityMatrix, medoids: &[usize]) -> Vec<Near> {
    (0..d.len())
        .map(|i| {
            let mut best = Near {
                slot: usize::MAX,
                d: f64::INFINITY,
                second: f64::INFINITY,
            };
            for (slot, &m) in medoids.iter().enumerate() {
                let dm = if m == i { -1.0 } else { d.get(i, m) };
                if dm < best.d {
                    best.second = best.d;
                    best = Near {
                        slot,
                        d: dm,
                        second: best.second,
                    };
                } else if dm < best.second {
                    best.second = dm;
                }
            }
            // -1 marks a medoid's own slot so ties with duplicates never steal it
            if best.d < 0.0 {
                best.d = 0.0;
            }
            best
        })
        .collect()
}

fn total_cost(near: &[Near]) -> f64 {
    near.iter().map(|n| n.d).sum()
}

/// Greedy BUILD initialization.
fn build(d: &DissimilarityMatrix, k: usize) -> Vec<usize> {
    let n = d.len();
    let mut medoids = Vec::with_capacity(k);
    let first = (0..n)
        .map(|j| (j, (0..n).map(|i| d.get(i, j)).sum::<f64>()))
        .fold(
            (0, f64::INFINITY),
            |best, (j, s)| if s < best.1 { (j, s) } else { best },
        )
        .0;
    medoids.push(first);
    let mut dist: Vec<f64> = (0..n).map(|i| d.get(i, first)).collect();
    let mut is_medoid = vec![false; n];
    is_medoid[first] = true;
    while medoids.len() < k {
        let mut best = (usize::MAX, f64::NEG_INFINITY);
        for j in (0..n).filter(|&j| !is_medoid[j]) {
            let gain: f64 = (0..n).map(|i| (dist[i] - d.get(i, j)).max(0.0)).sum();
            if gain > best.1 {
                best = (j, gain);
            }
        }
        let j = best.0;
        medoids.push(j);
        is_medoid[j] = true;
        for i in 0..n {
            dist[i] = dist[i].min(d.get(i, j));
        }
    }
    medoids.sort_unstable();
    medoids
}

/// Eager swap search: for each non-medoid in turn, apply its best swap if it
/// lowers the cost; stop after a full pass over the points without a swap.
fn swap(d: &DissimilarityMatrix, mut medoids: Vec<usize>) -> (Vec<usize>, Vec<Near>) {
    let n = d.len();
    let k = medoids.len();
    let mut near = nearest(d, &medoids);
    if k == n {
        return (medoids, near);
    }
    let mut is_medoid = vec![false; n];
    for &m in &medoids {
        is_medoid[m] = true;
    }
    let mut removal = vec![0.0; k];
    let mut loss = vec![0.0; k];
    let mut since_last = 0;
    let mut x = 0;
    while since_last < n {
        if !is_medoid[x] {
            removal.fill(0.0);
            for nr in &near {
                removal[nr.slot] += nr.second - nr.d;
            }
            loss.copy_from_slice(&removal);
            let mut shared = 0.0;
            for (o, nr) in near.iter().enumerate() {
                let dox = d.get(o, x);
                if dox < nr.d {
                    shared += dox - nr.d;
                    loss[nr.slot] += nr.d - nr.second;
                } else if dox < nr.second {
                    loss[nr.slot] += dox - nr.second;
                }
            }
            let (slot, delta) =
                loss.iter().enumerate().fold(
                    (0, f64::INFINITY),
                    |best, (s, &l)| if l < best.1 { (s, l) } else { best },
                );
            if shared + delta < -SWAP_EPS {
                is_medoid[medoids[slot]] = false;
                is_medoid[x] = true;
                medoids[slot] = x;
                medoids.sort_unstable();
                near = nearest(d, &medoids);
                since_last = 0;
            }
        }
        since_last += 1;
        x = (x + 1) % n;
    }
    (medoids, near)
}

/// PAM-style k-medoids: BUILD then swaps, and `restarts - 1` more runs from
/// seeded random medoids. Returns the cheapest run, earliest on ties.
pub fn k_medoids(d: &DissimilarityMatrix, k: usize, seed: u64, restarts: usize) -> Result<Clustering> {
    let n = d.len();
    if k == 0 || k > n {
        return Err(Error::OutOfRange("k", format!("{k} (patterns: {n})")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut starts = vec![build(d, k)];
    for _ in 1..restarts.max(1) {
        let mut s = sample(&mut rng, n, k).into_vec();
        s.sort_unstable();
        starts.push(s);
    }
    let runs: Vec<(Vec<usize>, Vec<Near>)> = starts.into_par_iter().map(|s| swap(d, s)).collect();
    let mut best: Option<(f64, &(Vec<usize>, Vec<Near>))> = None;
    for run in &runs {
        let cost = total_cost(&run.1);
        if best.is_none_or(|(c, _)| cost < c - SWAP_EPS) {
            best = Some((cost, run));
        }
    }
    let (cost, (medoids, near)) = best.expect("at least one run");
    let labels = near.iter().map(|nr| nr.slot).collect();
    Clustering::from_parts(labels, medoids.clone(), cost)
}

/// Mean silhouette. Members of singleton clusters score 0, as does any point
/// whose within- and nearest-other-cluster means are both 0.
pub fn silhouette(d: &DissimilarityMatrix, clustering: &Clustering) -> Result<f64> {
    Ok(silhouette_values(d, clustering)?.iter().sum::<f64>() / d.len() as f64)
}

pub fn silhouette_values(d: &DissimilarityMatrix, clustering: &Clustering) -> Result<Vec<f64>> {
    let n = d.len();
    if clustering.labels.len() != n {
        return Err(Error::UniverseMismatch("clustering and matrix sizes differ".into()));
    }
    if clustering.k < 2 {
        return Err(Error::OutOfRange(
            "k",
            format!("{} (silhouette needs at least 2 clusters)", clustering.k),
        ));
    }
    let sizes = clustering.sizes();
    let mut out = Vec::with_capacity(n);
    let mut sums = vec![0.0; clustering.k];
    for i in 0..n {
        let own = clustering.labels[i];
        if sizes[own] == 1 {
            out.push(0.0);
            continue;
        }
        sums.fill(0.0);
        for j in 0..n {
            if j != i {
                sums[clustering.labels[j]] += d.get(i, j);
            }
        }
        let a = sums[own] / (sizes[own] - 1) as f64;
        let b = (0..clustering.k)
            .filter(|&c| c != own)
            .map(|c| sums[c] / sizes[c] as f64)
            .fold(f64::INFINITY, f64::min);
        let m = a.max(b);
        out.push(if m == 0.0 { 0.0 } else { (b - a) / m });
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepEntry {
    pub k: usize,
    pub silhouette: f64,
    pub clustering: Clustering,
}

/// Patterns moving from cluster `from` at `k` to cluster `to` at `k + 1`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Transition {
    pub k: usize,
    pub from: usize,
    pub to: usize,
    pub count: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepReport {
    pub ids: Vec<String>,
    pub entries: Vec<SweepEntry>,
    pub transitions: Vec<Transition>,
}

impl SweepReport {
    pub fn entry(&self, k: usize) -> Option<&SweepEntry> {
        self.entries.iter().find(|e| e.k == k)
    }

    /// k of highest silhouette, smallest k on ties.
    pub fn best_k(&self) -> usize {
        self.entries
            .iter()
            .fold(None::<&SweepEntry>, |best, e| match best {
                Some(b) if b.silhouette >= e.silhouette => Some(b),
                _ => Some(e),
            })
            .map(|e| e.k)
            .expect("sweep has entries")
    }

    /// All k whose silhouette is within `tol` of the best one.
    pub fn near_best(&self, tol: f64) -> Vec<usize> {
        let best = self.entry(self.best_k()).unwrap().silhouette;
        self.entries
            .iter()
            .filter(|e| best - e.silhouette <= tol)
            .map(|e| e.k)
            .collect()
    }

    /// Share of patterns at `k + 1` whose cluster lies mostly inside one
    /// cluster at `k` (1 for a strict refinement). Reported only.
    pub fn nesting(&self, k: usize) -> Option<f64> {
        let n = self.ids.len() as f64;
        let cells: Vec<&Transition> = self.transitions.iter().filter(|t| t.k == k).collect();
        if cells.is_empty() {
            return None;
        }
        let mut best_per_child: BTreeMap<usize, usize> = BTreeMap::new();
        for t in cells {
            let e = best_per_child.entry(t.to).or_default();
            *e = (*e).max(t.count);
        }
        Some(best_per_child.values().sum::<usize>() as f64 / n)
    }

    /// `k,silhouette,cost,nesting` rows.
    pub fn write_sweep_csv(&self, path: &Path) -> Result<()> {
        let file = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
        let mut w = csv::Writer::from_writer(file);
        w.write_record(["k", "silhouette", "cost", "nesting"])?;
        for e in &self.entries {
            let nesting = self.nesting(e.k).map(|x| x.to_string()).unwrap_or_default();
            w.write_record([
                e.k.to_string(),
                e.silhouette.to_string(),
                e.clustering.cost.to_string(),
                nesting,
            ])?;
        }
        w.flush().map_err(|e| Error::io(path, e))
    }

    /// `rollcall_id,k,cluster_id` rows, cluster ids from 1.
    pub fn write_alluvial_csv(&self, path: &Path) -> Result<()> {
        let file = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
        let mut w = csv::Writer::from_writer(file);
        w.write_record(["rollcall_id", "k", "cluster_id"])?;
        for e in &self.entries {
            for (id, &l) in self.ids.iter().zip(&e.clustering.labels) {
                w.write_record([id.clone(), e.k.to_string(), (l + 1).to_string()])?;
            }
        }
        w.flush().map_err(|e| Error::io(path, e))
    }
}

pub fn sweep_k(d: &DissimilarityMatrix, k_min: usize, k_max: usize, seed: u64, restarts: usize) -> Result<SweepReport> {
    let n = d.len();
    if !(2 <= k_min && k_min <= k_max && k_max <= n) {
        return Err(Error::OutOfRange(
            "k range",
            format!("{k_min}..={k_max} with {n} patterns"),
        ));
    }
    let entries: Vec<SweepEntry> = (k_min..=k_max)
        .into_par_iter()
        .map(|k| {
            let clustering = k_medoids(d, k, seed, restarts)?;
            let silhouette = silhouette(d, &clustering)?;
            Ok(SweepEntry {
                k,
                silhouette,
                clustering,
            })
        })
        .collect::<Result<_>>()?;

    let mut transitions = Vec::new();
    for pair in entries.windows(2) {
        let mut counts: BTreeMap<(usize, usize), usize> = BTreeMap::new();
        for (&a, &b) in pair[0].clustering.labels.iter().zip(&pair[1].clustering.labels) {
            *counts.entry((a, b)).or_default() += 1;
        }
        transitions.extend(counts.into_iter().map(|((from, to), count)| Transition {
            k: pair[0].k,
            from,
            to,
            count,
        }));
    }
    Ok(SweepReport {
        ids: d.ids.clone(),
        entries,
        transitions,
    })
}
