//! Independent reference implementations used by the integration and
//! acceptance tests. They work from definitions (pair and overlap
//! enumeration, exhaustive partition search) and share no code with the
//! library beyond its data types.

#![allow(dead_code)]

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use vote_patterns::cc::{Partition, WeightedSignedGraph};

pub const COST_EPS: f64 = 1e-9;

pub fn ids(n: usize) -> Vec<String> {
    (0..n).map(|i| format!("n{i:02}")).collect()
}

pub fn partition(labels: &[usize]) -> Partition {
    Partition::from_labels(&ids(labels.len()), labels)
}

pub fn random_labels(rng: &mut ChaCha8Rng, n: usize) -> Vec<usize> {
    let k = rng.gen_range(1..=n);
    (0..n).map(|_| rng.gen_range(0..k)).collect()
}

fn pair_counts(p: &[usize], q: &[usize]) -> (f64, f64, f64, f64) {
    // together in both, only in p, only in q, apart in both
    let (mut a, mut b, mut c, mut d) = (0.0, 0.0, 0.0, 0.0);
    for i in 0..p.len() {
        for j in i + 1..p.len() {
            match (p[i] == p[j], q[i] == q[j]) {
                (true, true) => a += 1.0,
                (true, false) => b += 1.0,
                (false, true) => c += 1.0,
                (false, false) => d += 1.0,
            }
        }
    }
    (a, b, c, d)
}

pub fn rand_index(p: &[usize], q: &[usize]) -> f64 {
    let (a, b, c, d) = pair_counts(p, q);
    (a + d) / (a + b + c + d)
}

pub fn same_partition(p: &[usize], q: &[usize]) -> bool {
    let (_, b, c, _) = pair_counts(p, q);
    b == 0.0 && c == 0.0
}

pub fn adjusted_rand(p: &[usize], q: &[usize]) -> f64 {
    let (a, b, c, d) = pair_counts(p, q);
    let den = (a + b) * (b + d) + (a + c) * (c + d);
    if den == 0.0 {
        return if same_partition(p, q) { 1.0 } else { 0.0 };
    }
    2.0 * (a * d - b * c) / den
}

fn blocks(labels: &[usize]) -> Vec<Vec<usize>> {
    let mut out: Vec<(usize, Vec<usize>)> = Vec::new();
    for (i, &l) in labels.iter().enumerate() {
        match out.iter_mut().find(|(x, _)| *x == l) {
            Some((_, m)) => m.push(i),
            None => out.push((l, vec![i])),
        }
    }
    out.into_iter().map(|(_, m)| m).collect()
}

fn overlap(x: &[usize], y: &[usize]) -> usize {
    x.iter().filter(|i| y.contains(i)).count()
}

fn directed_purity(p: &[Vec<usize>], q: &[Vec<usize>], n: usize) -> f64 {
    p.iter()
        .map(|b| q.iter().map(|c| overlap(b, c)).max().unwrap())
        .sum::<usize>() as f64
        / n as f64
}

pub fn purity(p: &[usize], q: &[usize]) -> f64 {
    let (bp, bq) = (blocks(p), blocks(q));
    let x = directed_purity(&bp, &bq, p.len());
    let y = directed_purity(&bq, &bp, p.len());
    2.0 * x * y / (x + y)
}

fn entropy(b: &[Vec<usize>], n: usize) -> f64 {
    b.iter()
        .map(|m| {
            let p = m.len() as f64 / n as f64;
            -p * p.ln()
        })
        .sum()
}

pub fn nmi(p: &[usize], q: &[usize]) -> f64 {
    if same_partition(p, q) {
        return 1.0;
    }
    let n = p.len();
    let (bp, bq) = (blocks(p), blocks(q));
    let (hp, hq) = (entropy(&bp, n), entropy(&bq, n));
    if hp == 0.0 || hq == 0.0 {
        return 0.0;
    }
    let mut mi = 0.0;
    for x in &bp {
        for y in &bq {
            let k = overlap(x, y) as f64;
            if k > 0.0 {
                let nf = n as f64;
                mi += k / nf * (k * nf / (x.len() as f64 * y.len() as f64)).ln();
            }
        }
    }
    (2.0 * mi / (hp + hq)).clamp(0.0, 1.0)
}

/// Imbalance straight from the definition: positive weight between blocks
/// plus negative weight magnitude inside blocks.
pub fn imbalance(g: &WeightedSignedGraph, labels: &[usize]) -> f64 {
    let mut cost = 0.0;
    for i in 0..g.n() {
        for j in i + 1..g.n() {
            let w = g.weight(i, j);
            if labels[i] == labels[j] && w < 0.0 {
                cost -= w;
            } else if labels[i] != labels[j] && w > 0.0 {
                cost += w;
            }
        }
    }
    cost
}

/// Exhaustive search over all set partitions, visited in lexicographic
/// order of their restricted-growth labelling; the first strictly better
/// (by more than `COST_EPS`) partition is kept.
pub fn exhaustive_cc(g: &WeightedSignedGraph) -> (Vec<usize>, f64) {
    fn rec(g: &WeightedSignedGraph, labels: &mut Vec<usize>, blocks: usize, best: &mut (Vec<usize>, f64)) {
        if labels.len() == g.n() {
            let c = imbalance(g, labels);
            if c < best.1 - COST_EPS {
                *best = (labels.clone(), c);
            }
            return;
        }
        for b in 0..=blocks {
            labels.push(b);
            rec(g, labels, blocks.max(b + 1), best);
            labels.pop();
        }
    }
    let mut best = (vec![], f64::INFINITY);
    rec(g, &mut Vec::new(), 0, &mut best);
    best
}

/// Weights uniform in [-1, 1] on each pair with probability `density`.
pub fn random_graph(rng: &mut ChaCha8Rng, n: usize, density: f64) -> WeightedSignedGraph {
    let mut g = WeightedSignedGraph::new(ids(n)).unwrap();
    for i in 0..n {
        for j in i + 1..n {
            if rng.gen_bool(density) {
                let w: f64 = rng.gen_range(-1.0..=1.0);
                if w != 0.0 {
                    g.set_weight_idx(i, j, w).unwrap();
                }
            }
        }
    }
    g
}

/// Complete graph, positive inside planted blocks and negative across, with
/// magnitudes in (0, 1]. Every block is non-empty.
pub fn planted_graph(rng: &mut ChaCha8Rng, n: usize, k: usize) -> (WeightedSignedGraph, Partition) {
    let mut labels: Vec<usize> = (0..n).map(|i| if i < k { i } else { rng.gen_range(0..k) }).collect();
    // shuffle so the forced members are not always the first ids
    for i in (1..n).rev() {
        let j = rng.gen_range(0..=i);
        labels.swap(i, j);
    }
    let mut g = WeightedSignedGraph::new(ids(n)).unwrap();
    for i in 0..n {
        for j in i + 1..n {
            let m: f64 = 1.0 - rng.gen_range(0.0..1.0);
            g.set_weight_idx(i, j, if labels[i] == labels[j] { m } else { -m })
                .unwrap();
        }
    }
    (g, partition(&labels))
}
