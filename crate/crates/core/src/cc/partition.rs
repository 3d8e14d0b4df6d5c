use std::collections::{BTreeSet, HashMap, HashSet};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A partition of a set of node ids into non-empty, disjoint blocks.
///
/// Always held in canonical form: members ascending inside each block, blocks
/// ordered by size descending, then by smallest member ascending.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "Vec<Vec<String>>", into = "Vec<Vec<String>>")]
pub struct Partition {
    blocks: Vec<Vec<String>>,
}

impl Partition {
    pub fn new<B, S>(blocks: impl IntoIterator<Item = B>) -> Result<Self>
    where
        B: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let mut out: Vec<Vec<String>> = Vec::new();
        let mut seen = HashSet::new();
        for block in blocks {
            let mut b: Vec<String> = block.into_iter().map(Into::into).collect();
            if b.is_empty() {
                return Err(Error::InvalidPartition("empty block".into()));
            }
            for id in &b {
                if !seen.insert(id.clone()) {
                    return Err(Error::InvalidPartition(format!("{id:?} appears in two blocks")));
                }
            }
            b.sort();
            out.push(b);
        }
        out.sort_by(|x, y| y.len().cmp(&x.len()).then_with(|| x[0].cmp(&y[0])));
        Ok(Partition { blocks: out })
    }

    /// Groups `ids[i]` by `labels[i]`; label values are arbitrary.
    pub fn from_labels<L: Eq + std::hash::Hash>(ids: &[String], labels: &[L]) -> Self {
        assert_eq!(ids.len(), labels.len());
        let mut index: HashMap<&L, usize> = HashMap::new();
        let mut blocks: Vec<Vec<String>> = Vec::new();
        for (id, l) in ids.iter().zip(labels) {
            let b = *index.entry(l).or_insert_with(|| {
                blocks.push(Vec::new());
                blocks.len() - 1
            });
            blocks[b].push(id.clone());
        }
        Partition::new(blocks).expect("labels always give a valid partition")
    }

    pub fn singleton_blocks<S: Into<String>>(ids: impl IntoIterator<Item = S>) -> Result<Self> {
        Partition::new(ids.into_iter().map(|id| vec![id.into()]))
    }

    pub fn blocks(&self) -> &[Vec<String>] {
        &self.blocks
    }

    pub fn n_blocks(&self) -> usize {
        self.blocks.len()
    }

    pub fn n_members(&self) -> usize {
        self.blocks.iter().map(Vec::len).sum()
    }

    pub fn members(&self) -> BTreeSet<&str> {
        self.blocks.iter().flatten().map(String::as_str).collect()
    }

    /// Member id → block index.
    pub fn block_of(&self) -> HashMap<&str, usize> {
        self.blocks
            .iter()
            .enumerate()
            .flat_map(|(b, block)| block.iter().map(move |id| (id.as_str(), b)))
            .collect()
    }

    /// Restricts to members in `keep`, dropping blocks that become empty.
    pub fn restrict(&self, keep: &HashSet<&str>) -> Partition {
        let blocks: Vec<Vec<String>> = self
            .blocks
            .iter()
            .map(|b| {
                b.iter()
                    .filter(|id| keep.contains(id.as_str()))
                    .cloned()
                    .collect::<Vec<_>>()
            })
            .filter(|b| !b.is_empty())
            .collect();
        Partition::new(blocks).expect("restriction of a partition is a partition")
    }

    /// Applies an id mapping to every member.
    pub fn renamed(&self, f: impl Fn(&str) -> String) -> Partition {
        Partition::new(self.blocks.iter().map(|b| b.iter().map(|id| f(id)).collect::<Vec<_>>()))
            .expect("renaming must be injective")
    }
}

impl TryFrom<Vec<Vec<String>>> for Partition {
    type Error = Error;

    fn try_from(blocks: Vec<Vec<String>>) -> Result<Self> {
        Partition::new(blocks)
    }
}

impl From<Partition> for Vec<Vec<String>> {
    fn from(p: Partition) -> Self {
        p.blocks
    }
}

impl fmt::Display for Partition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.blocks.iter().map(|b| b.join(",")).collect();
        write!(f, "{{{}}}", parts.join(" | "))
    }
}
