use std::collections::{BTreeSet, HashMap};
use std::fmt::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Complete symmetric weight table over a named node set.
///
/// Nodes are held in ascending id order; that order defines node indices and
/// the tie-break among equal-cost partitions. A zero weight means "no edge".
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WeightedSignedGraph {
    ids: Vec<String>,
    weights: Vec<f64>,
}

impl WeightedSignedGraph {
    /// Edgeless graph over `ids` (any order, must be unique).
    pub fn new<I, S>(ids: I) -> Result<Self>
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let mut ids: Vec<String> = ids.into_iter().map(Into::into).collect();
        ids.sort();
        if let Some(w) = ids.windows(2).find(|w| w[0] == w[1]) {
            return Err(Error::InvalidGraph(format!("duplicate node id {:?}", w[0])));
        }
        let n = ids.len();
        Ok(WeightedSignedGraph {
            ids,
            weights: vec![0.0; n * n],
        })
    }

    pub fn from_edges<I, S>(ids: I, edges: &[(&str, &str, f64)]) -> Result<Self>
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let mut g = Self::new(ids)?;
        for &(u, v, w) in edges {
            g.set_weight(u, v, w)?;
        }
        Ok(g)
    }

    pub fn n(&self) -> usize {
        self.ids.len()
    }

    pub fn ids(&self) -> &[String] {
        &self.ids
    }

    pub fn index_of(&self, id: &str) -> Option<usize> {
        self.ids.binary_search_by(|x| x.as_str().cmp(id)).ok()
    }

    #[inline]
    pub fn weight(&self, i: usize, j: usize) -> f64 {
        self.weights[i * self.ids.len() + j]
    }

    /// Row `i` of the weight table.
    #[inline]
    pub fn row(&self, i: usize) -> &[f64] {
        let n = self.ids.len();
        &self.weights[i * n..(i + 1) * n]
    }

    pub fn set_weight_idx(&mut self, i: usize, j: usize, w: f64) -> Result<()> {
        if i == j {
            return Err(Error::InvalidGraph(format!("self-loop on {:?}", self.ids[i])));
        }
        if !w.is_finite() || w.abs() > 1.0 {
            return Err(Error::InvalidGraph(format!("weight {w} outside [-1, 1]")));
        }
        let n = self.ids.len();
        self.weights[i * n + j] = w;
        self.weights[j * n + i] = w;
        Ok(())
    }

    pub fn set_weight(&mut self, u: &str, v: &str, w: f64) -> Result<()> {
        let i = self
            .index_of(u)
            .ok_or_else(|| Error::InvalidGraph(format!("unknown node {u:?}")))?;
        let j = self
            .index_of(v)
            .ok_or_else(|| Error::InvalidGraph(format!("unknown node {v:?}")))?;
        self.set_weight_idx(i, j, w)
    }

    /// Multiplies every weight by `factor`. Weights may leave [-1, 1]; used to
    /// check that the optimum does not depend on the weight scale.
    pub fn scaled(&self, factor: f64) -> Self {
        WeightedSignedGraph {
            ids: self.ids.clone(),
            weights: self.weights.iter().map(|w| w * factor).collect(),
        }
    }

    /// Nonzero edges `(i, j, w)` with `i < j`.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        let n = self.n();
        (0..n).flat_map(move |i| {
            (i + 1..n).filter_map(move |j| {
                let w = self.weight(i, j);
                (w != 0.0).then_some((i, j, w))
            })
        })
    }

    /// Edge-list text: one `u,v,w` line per nonzero edge, and a bare `u`
    /// line for every node without edges so the node set survives.
    pub fn to_edge_list(&self) -> String {
        let mut out = String::new();
        let mut touched = vec![false; self.n()];
        for (i, j, w) in self.edges() {
            touched[i] = true;
            touched[j] = true;
            let _ = writeln!(out, "{},{},{}", self.ids[i], self.ids[j], w);
        }
        for (i, t) in touched.iter().enumerate() {
            if !t {
                let _ = writeln!(out, "{}", self.ids[i]);
            }
        }
        out
    }

    /// Parses the format of [`Self::to_edge_list`]. Blank lines and lines
    /// starting with `#` are ignored; signs `+1`/`-1` are ordinary weights.
    pub fn parse_edge_list(text: &str) -> Result<Self> {
        let mut nodes = BTreeSet::new();
        let mut edges: Vec<(String, String, f64)> = Vec::new();
        for (lineno, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let fields: Vec<&str> = line.split(',').map(str::trim).collect();
            let bad = |m: &str| Error::parse("<edge list>", lineno as u64 + 1, m.to_string());
            match fields.as_slice() {
                [u] => {
                    nodes.insert(u.to_string());
                }
                [u, v, w] => {
                    let w: f64 = w.parse().map_err(|_| bad("weight is not a number"))?;
                    nodes.insert(u.to_string());
                    nodes.insert(v.to_string());
                    edges.push((u.to_string(), v.to_string(), w));
                }
                _ => return Err(bad("expected `u,v,w` or `u`")),
            }
        }
        let mut g = Self::new(nodes)?;
        let mut seen: HashMap<(usize, usize), f64> = HashMap::new();
        for (u, v, w) in edges {
            let (i, j) = (g.index_of(&u).unwrap(), g.index_of(&v).unwrap());
            let key = (i.min(j), i.max(j));
            if let Some(prev) = seen.insert(key, w) {
                if prev != w {
                    return Err(Error::InvalidGraph(format!("conflicting weights for {u},{v}")));
                }
            }
            g.set_weight_idx(i, j, w)?;
        }
        Ok(g)
    }

    pub fn write_edge_list(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_edge_list()).map_err(|e| Error::io(path, e))
    }

    pub fn read_edge_list(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse_edge_list(&text)
    }
}
