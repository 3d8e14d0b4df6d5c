//! One unweighted signed layer per roll-call.
//!
//! A layer links every pair of participating voters: positively when they
//! cast the same value, negatively otherwise. Layers are stored as the vote
//! of each participant, which determines the edge sets exactly.

use std::fmt::Write as _;
use std::path::Path;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::cc::WeightedSignedGraph;
use crate::error::{Error, Result};
use crate::ingest::{VoteMatrix, VoteValue};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AbstentionPolicy {
    /// Abstainers are nodes and ABSTAIN is a third vote value.
    #[default]
    Keep,
    /// Abstainers are dropped like absentees.
    Drop,
}

impl AbstentionPolicy {
    fn includes(self, v: VoteValue) -> bool {
        match v {
            VoteValue::Absent => false,
            VoteValue::Abstain => self == AbstentionPolicy::Keep,
            VoteValue::For | VoteValue::Against => true,
        }
    }
}

impl FromStr for AbstentionPolicy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "keep" => Ok(AbstentionPolicy::Keep),
            "drop" => Ok(AbstentionPolicy::Drop),
            other => Err(Error::Config(format!(
                "abstention policy must be keep or drop, got {other:?}"
            ))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SignedLayer {
    pub rollcall_id: String,
    /// Participating voter ids, in matrix order.
    pub nodes: Vec<String>,
    /// Vote cast by `nodes[i]`.
    pub votes: Vec<VoteValue>,
}

impl SignedLayer {
    pub fn n(&self) -> usize {
        self.nodes.len()
    }

    /// Fewer than two participants: nothing to partition.
    pub fn is_degenerate(&self) -> bool {
        self.nodes.len() < 2
    }

    pub fn sign_idx(&self, i: usize, j: usize) -> i8 {
        if self.votes[i] == self.votes[j] {
            1
        } else {
            -1
        }
    }

    /// Sign of the edge between two voters, `None` if either did not take part.
    pub fn sign(&self, u: &str, v: &str) -> Option<i8> {
        let i = self.nodes.iter().position(|x| x == u)?;
        let j = self.nodes.iter().position(|x| x == v)?;
        (i != j).then(|| self.sign_idx(i, j))
    }

    fn edges_with_sign(&self, sign: i8) -> Vec<(String, String)> {
        let mut out = Vec::new();
        for i in 0..self.n() {
            for j in i + 1..self.n() {
                if self.sign_idx(i, j) == sign {
                    out.push((self.nodes[i].clone(), self.nodes[j].clone()));
                }
            }
        }
        out
    }

    pub fn positive_edges(&self) -> Vec<(String, String)> {
        self.edges_with_sign(1)
    }

    pub fn negative_edges(&self) -> Vec<(String, String)> {
        self.edges_with_sign(-1)
    }

    /// The layer as a ±1 weighted graph.
    pub fn to_graph(&self) -> Result<WeightedSignedGraph> {
        let mut g = WeightedSignedGraph::new(self.nodes.iter().cloned())?;
        let idx: Vec<usize> = self.nodes.iter().map(|id| g.index_of(id).unwrap()).collect();
        for i in 0..self.n() {
            for j in i + 1..self.n() {
                g.set_weight_idx(idx[i], idx[j], f64::from(self.sign_idx(i, j)))?;
            }
        }
        Ok(g)
    }

    /// `u,v,+1` / `u,v,-1` lines; a lone participant is written as a bare id.
    pub fn to_edge_list(&self) -> String {
        let mut out = String::new();
        for i in 0..self.n() {
            for j in i + 1..self.n() {
                let s = if self.sign_idx(i, j) > 0 { "+1" } else { "-1" };
                let _ = writeln!(out, "{},{},{}", self.nodes[i], self.nodes[j], s);
            }
        }
        if self.n() == 1 {
            let _ = writeln!(out, "{}", self.nodes[0]);
        }
        out
    }

    /// GraphML document with a `sign` edge attribute and a `vote` node attribute.
    pub fn to_graphml(&self) -> String {
        let mut out = String::new();
        out.push_str("<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n");
        out.push_str("<graphml xmlns=\"http://graphml.graphdrawing.org/xmlns\">\n");
        out.push_str("  <key id=\"vote\" for=\"node\" attr.name=\"vote\" attr.type=\"string\"/>\n");
        out.push_str("  <key id=\"sign\" for=\"edge\" attr.name=\"sign\" attr.type=\"int\"/>\n");
        let _ = writeln!(
            out,
            "  <graph id=\"{}\" edgedefault=\"undirected\">",
            xml_escape(&self.rollcall_id)
        );
        for (id, v) in self.nodes.iter().zip(&self.votes) {
            let _ = writeln!(
                out,
                "    <node id=\"{}\"><data key=\"vote\">{}</data></node>",
                xml_escape(id),
                v
            );
        }
        for i in 0..self.n() {
            for j in i + 1..self.n() {
                let _ = writeln!(
                    out,
                    "    <edge source=\"{}\" target=\"{}\"><data key=\"sign\">{}</data></edge>",
                    xml_escape(&self.nodes[i]),
                    xml_escape(&self.nodes[j]),
                    self.sign_idx(i, j)
                );
            }
        }
        out.push_str("  </graph>\n</graphml>\n");
        out
    }
}

fn xml_escape(s: &str) -> String {
    s.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
        .replace('"', "&quot;")
        .replace('\'', "&apos;")
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MultiplexGraph {
    pub voters: Vec<String>,
    pub policy: AbstentionPolicy,
    pub layers: Vec<SignedLayer>,
}

impl MultiplexGraph {
    pub fn degenerate_layers(&self) -> Vec<&str> {
        self.layers
            .iter()
            .filter(|l| l.is_degenerate())
            .map(|l| l.rollcall_id.as_str())
            .collect()
    }

    pub fn write_json(&self, path: &Path) -> Result<()> {
        let text = serde_json::to_string(self)?;
        std::fs::write(path, text).map_err(|e| Error::io(path, e))
    }

    pub fn read_json(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Ok(serde_json::from_str(&text)?)
    }
}

fn layer_at(matrix: &VoteMatrix, r: usize, policy: AbstentionPolicy) -> SignedLayer {
    let mut nodes = Vec::new();
    let mut votes = Vec::new();
    for (voter, value) in matrix.voters().iter().zip(matrix.column(r)) {
        if policy.includes(value) {
            nodes.push(voter.id.clone());
            votes.push(value);
        }
    }
    SignedLayer {
        rollcall_id: matrix.rollcalls()[r].rollcall_id.clone(),
        nodes,
        votes,
    }
}

pub fn extract_layer(matrix: &VoteMatrix, rollcall_id: &str, policy: AbstentionPolicy) -> Result<SignedLayer> {
    let r = matrix
        .rollcall_index(rollcall_id)
        .ok_or_else(|| Error::UnknownRollcall(rollcall_id.to_string()))?;
    Ok(layer_at(matrix, r, policy))
}

pub fn extract_multiplex(matrix: &VoteMatrix, policy: AbstentionPolicy) -> Result<MultiplexGraph> {
    if matrix.n_voters() == 0 || matrix.n_rollcalls() == 0 {
        return Err(Error::EmptySelection("vote matrix is empty".into()));
    }
    let layers: Vec<SignedLayer> = (0..matrix.n_rollcalls())
        .into_par_iter()
        .map(|r| layer_at(matrix, r, policy))
        .collect();
    Ok(MultiplexGraph {
        voters: matrix.voters().iter().map(|v| v.id.clone()).collect(),
        policy,
        layers,
    })
}
