//! Partition similarity (Purity, Rand, adjusted Rand, NMI) between voting
//! patterns, and the pattern-by-pattern dissimilarity matrix.
//!
//! Two patterns are only compared over the voters present in both.

use std::collections::{HashMap, HashSet};
use std::fmt;
use std::path::Path;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::cc::Partition;
use crate::error::{Error, Result};

/// The partition of the voters who took part in one roll-call.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Pattern {
    pub rollcall_id: String,
    pub partition: Partition,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Measure {
    #[default]
    Purity,
    Ri,
    Ari,
    Nmi,
}

impl Measure {
    pub const ALL: [Measure; 4] = [Measure::Purity, Measure::Ri, Measure::Ari, Measure::Nmi];

    pub fn name(self) -> &'static str {
        match self {
            Measure::Purity => "purity",
            Measure::Ri => "ri",
            Measure::Ari => "ari",
            Measure::Nmi => "nmi",
        }
    }

    pub fn of(self, p: &Partition, q: &Partition) -> Result<f64> {
        let table = Contingency::same_universe(p, q)?;
        self.on_table(&table)
    }

    fn on_table(self, t: &Contingency) -> Result<f64> {
        match self {
            Measure::Purity => t.purity_harmonic(),
            Measure::Ri => t.rand_index(),
            Measure::Ari => t.adjusted_rand(),
            Measure::Nmi => t.nmi(),
        }
    }
}

impl fmt::Display for Measure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Measure {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Measure::ALL
            .into_iter()
            .find(|m| m.name().eq_ignore_ascii_case(s.trim()))
            .ok_or_else(|| Error::Config(format!("unknown measure {s:?} (purity, ri, ari, nmi)")))
    }
}

/// Block-overlap counts between two partitions of one member set.
#[derive(Debug, Clone)]
struct Contingency {
    /// Nonzero cells `(row, col, count)`.
    cells: Vec<(usize, usize, u64)>,
    rows: Vec<u64>,
    cols: Vec<u64>,
    n: u64,
}

fn choose2(x: u64) -> u128 {
    let x = x as u128;
    x * x.saturating_sub(1) / 2
}

impl Contingency {
    fn build(members: impl Iterator<Item = (usize, usize)>, n_rows: usize, n_cols: usize) -> Self {
        let mut counts: HashMap<(usize, usize), u64> = HashMap::new();
        for cell in members {
            *counts.entry(cell).or_default() += 1;
        }
        let mut cells: Vec<(usize, usize, u64)> = counts.into_iter().map(|((r, c), k)| (r, c, k)).collect();
        cells.sort_unstable();
        let mut rows = vec![0; n_rows];
        let mut cols = vec![0; n_cols];
        for &(r, c, k) in &cells {
            rows[r] += k;
            cols[c] += k;
        }
        rows.retain(|&x| x > 0);
        cols.retain(|&x| x > 0);
        let n = rows.iter().sum();
        Contingency { cells, rows, cols, n }
    }

    fn same_universe(p: &Partition, q: &Partition) -> Result<Self> {
        let qb = q.block_of();
        if p.n_members() != qb.len() {
            return Err(Error::UniverseMismatch("partitions cover different member sets".into()));
        }
        let mut pairs = Vec::with_capacity(qb.len());
        for (b, block) in p.blocks().iter().enumerate() {
            for id in block {
                let c = *qb
                    .get(id.as_str())
                    .ok_or_else(|| Error::UniverseMismatch(format!("{id:?} missing from second partition")))?;
                pairs.push((b, c));
            }
        }
        Ok(Contingency::build(pairs.into_iter(), p.n_blocks(), q.n_blocks()))
    }

    /// Both partitions are the same: each row and each column has one cell.
    fn identical(&self) -> bool {
        self.cells.len() == self.rows.len() && self.cells.len() == self.cols.len()
    }

    fn purity_harmonic(&self) -> Result<f64> {
        if self.n == 0 {
            return Err(Error::Undefined("purity of empty partitions".into()));
        }
        let mut row_max: HashMap<usize, u64> = HashMap::new();
        let mut col_max: HashMap<usize, u64> = HashMap::new();
        for &(r, c, k) in &self.cells {
            let e = row_max.entry(r).or_default();
            *e = (*e).max(k);
            let e = col_max.entry(c).or_default();
            *e = (*e).max(k);
        }
        let n = self.n as f64;
        let p_given_q = row_max.values().sum::<u64>() as f64 / n;
        let q_given_p = col_max.values().sum::<u64>() as f64 / n;
        Ok(2.0 * p_given_q * q_given_p / (p_given_q + q_given_p))
    }

    fn pair_sums(&self) -> (u128, u128, u128, u128) {
        let joint = self.cells.iter().map(|&(_, _, k)| choose2(k)).sum();
        let rows = self.rows.iter().map(|&k| choose2(k)).sum();
        let cols = self.cols.iter().map(|&k| choose2(k)).sum();
        (joint, rows, cols, choose2(self.n))
    }

    fn rand_index(&self) -> Result<f64> {
        if self.n < 2 {
            return Err(Error::Undefined("rand index needs at least two members".into()));
        }
        let (joint, rows, cols, total) = self.pair_sums();
        // agreeing pairs: together in both, plus apart in both
        let agree = total + 2 * joint - rows - cols;
        Ok(agree as f64 / total as f64)
    }

    fn adjusted_rand(&self) -> Result<f64> {
        if self.n == 0 {
            return Err(Error::Undefined("adjusted rand of empty partitions".into()));
        }
        let (joint, rows, cols, total) = self.pair_sums();
        // (index - expected) / (max - expected), scaled by 2 * total
        let num = 2 * joint as i128 * total as i128 - 2 * rows as i128 * cols as i128;
        let den = (rows + cols) as i128 * total as i128 - 2 * rows as i128 * cols as i128;
        if den == 0 {
            return Ok(if self.identical() { 1.0 } else { 0.0 });
        }
        Ok(num as f64 / den as f64)
    }

    fn nmi(&self) -> Result<f64> {
        if self.n == 0 {
            return Err(Error::Undefined("NMI of empty partitions".into()));
        }
        if self.identical() {
            return Ok(1.0);
        }
        let n = self.n as f64;
        let entropy = |sizes: &[u64]| -> f64 {
            sizes
                .iter()
                .map(|&k| {
                    let p = k as f64 / n;
                    -p * p.ln()
                })
                .sum()
        };
        let (h_rows, h_cols) = (entropy(&self.rows), entropy(&self.cols));
        if h_rows == 0.0 || h_cols == 0.0 {
            return Ok(0.0);
        }
        // block sizes indexed by original block number
        let mut row_size: HashMap<usize, u64> = HashMap::new();
        let mut col_size: HashMap<usize, u64> = HashMap::new();
        for &(r, c, k) in &self.cells {
            *row_size.entry(r).or_default() += k;
            *col_size.entry(c).or_default() += k;
        }
        let mi: f64 = self
            .cells
            .iter()
            .map(|&(r, c, k)| {
                let k = k as f64;
                k / n * (n * k / (row_size[&r] as f64 * col_size[&c] as f64)).ln()
            })
            .sum();
        Ok((2.0 * mi / (h_rows + h_cols)).clamp(0.0, 1.0))
    }
}

/// Both partitions restricted to the members they share.
pub fn restrict_common(p: &Pattern, q: &Pattern) -> Result<(Partition, Partition)> {
    let qm = q.partition.members();
    let common: HashSet<&str> = p.partition.members().into_iter().filter(|id| qm.contains(id)).collect();
    if common.is_empty() {
        return Err(Error::NoCommonMembers(p.rollcall_id.clone(), q.rollcall_id.clone()));
    }
    Ok((p.partition.restrict(&common), q.partition.restrict(&common)))
}

/// Harmonic mean of the two directed purities.
pub fn purity_harmonic(p: &Partition, q: &Partition) -> Result<f64> {
    Measure::Purity.of(p, q)
}

pub fn rand_index(p: &Partition, q: &Partition) -> Result<f64> {
    Measure::Ri.of(p, q)
}

/// Hubert–Arabie adjusted Rand index. When the chance correction is
/// degenerate (both partitions all-singletons or both one block) the result
/// is 1 for identical partitions and 0 otherwise.
pub fn adjusted_rand(p: &Partition, q: &Partition) -> Result<f64> {
    Measure::Ari.of(p, q)
}

/// Mutual information normalized by the arithmetic mean of both entropies.
/// If either entropy is zero: 1 for identical partitions, 0 otherwise.
pub fn nmi(p: &Partition, q: &Partition) -> Result<f64> {
    Measure::Nmi.of(p, q)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DissimilarityMatrix {
    pub measure: Measure,
    pub ids: Vec<String>,
    /// Row-major `ids.len()²` entries.
    values: Vec<f64>,
}

/// A matrix entry that could not be computed and was set to 1.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PairWarning {
    pub first: String,
    pub second: String,
    pub reason: String,
}

impl DissimilarityMatrix {
    /// Builds a matrix from a full square table; checks symmetry, zero diagonal and range.
    pub fn from_values(measure: Measure, ids: Vec<String>, values: Vec<f64>) -> Result<Self> {
        let n = ids.len();
        if values.len() != n * n {
            return Err(Error::Config(format!(
                "matrix has {} entries, expected {}",
                values.len(),
                n * n
            )));
        }
        for i in 0..n {
            if values[i * n + i] != 0.0 {
                return Err(Error::Config(format!("nonzero diagonal at {:?}", ids[i])));
            }
            for j in 0..n {
                let v = values[i * n + j];
                if !(0.0..=1.0).contains(&v) || v != values[j * n + i] {
                    return Err(Error::Config(format!(
                        "entry ({}, {}) = {v} is out of range or asymmetric",
                        ids[i], ids[j]
                    )));
                }
            }
        }
        Ok(DissimilarityMatrix { measure, ids, values })
    }

    pub fn len(&self) -> usize {
        self.ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ids.is_empty()
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.values[i * self.ids.len() + j]
    }

    /// Sub-matrix over the given indices, in that order.
    pub fn select(&self, idx: &[usize]) -> DissimilarityMatrix {
        let values = idx
            .iter()
            .flat_map(|&i| idx.iter().map(move |&j| (i, j)))
            .map(|(i, j)| self.get(i, j))
            .collect();
        DissimilarityMatrix {
            measure: self.measure,
            ids: idx.iter().map(|&i| self.ids[i].clone()).collect(),
            values,
        }
    }

    /// CSV with the measure name in the corner cell and pattern ids on both axes.
    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let file = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
        let mut w = csv::Writer::from_writer(file);
        let mut header = vec![self.measure.name().to_string()];
        header.extend(self.ids.iter().cloned());
        w.write_record(&header)?;
        for (i, id) in self.ids.iter().enumerate() {
            let mut row = vec![id.clone()];
            row.extend((0..self.len()).map(|j| self.get(i, j).to_string()));
            w.write_record(&row)?;
        }
        w.flush().map_err(|e| Error::io(path, e))
    }

    pub fn read_csv(path: &Path) -> Result<Self> {
        let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
        let mut rdr = csv::ReaderBuilder::new().has_headers(true).from_reader(file);
        let header = rdr.headers()?.clone();
        let measure: Measure = header.get(0).unwrap_or_default().parse()?;
        let ids: Vec<String> = header.iter().skip(1).map(String::from).collect();
        let mut values = Vec::with_capacity(ids.len() * ids.len());
        for (i, rec) in rdr.records().enumerate() {
            let rec = rec?;
            let line = rec.position().map_or(0, |p| p.line());
            if ids.get(i).map(String::as_str) != rec.get(0) {
                return Err(Error::parse(path, line, "row id does not match header order"));
            }
            for cell in rec.iter().skip(1) {
                values.push(
                    cell.parse::<f64>()
                        .map_err(|_| Error::parse(path, line, format!("bad number {cell:?}")))?,
                );
            }
        }
        DissimilarityMatrix::from_values(measure, ids, values)
    }
}

/// Pairwise `1 - similarity` over common members, clamped into [0, 1].
/// Pairs that cannot be compared get 1 and a warning.
pub fn dissimilarity_matrix(patterns: &[Pattern], measure: Measure) -> Result<(DissimilarityMatrix, Vec<PairWarning>)> {
    let n = patterns.len();
    if n < 2 {
        return Err(Error::OutOfRange("pattern count", format!("{n} (need at least 2)")));
    }
    let lookups: Vec<HashMap<&str, usize>> = patterns.iter().map(|p| p.partition.block_of()).collect();

    let rows: Vec<Vec<(usize, std::result::Result<f64, String>)>> = (0..n)
        .into_par_iter()
        .map(|i| {
            (i + 1..n)
                .map(|j| {
                    let (p, q) = (&patterns[i].partition, &lookups[j]);
                    let cells =
                        p.blocks().iter().enumerate().flat_map(|(b, block)| {
                            block.iter().filter_map(move |id| q.get(id.as_str()).map(|&c| (b, c)))
                        });
                    let table = Contingency::build(cells, p.n_blocks(), patterns[j].partition.n_blocks());
                    let value = if table.n == 0 {
                        Err("no common members".to_string())
                    } else {
                        measure.on_table(&table).map_err(|e| e.to_string())
                    };
                    (j, value)
                })
                .collect()
        })
        .collect();

    let mut values = vec![0.0; n * n];
    let mut warnings = Vec::new();
    for (i, row) in rows.into_iter().enumerate() {
        for (j, value) in row {
            let d = match value {
                Ok(s) => (1.0 - s).clamp(0.0, 1.0),
                Err(reason) => {
                    log::warn!(
                        "patterns {} and {}: {reason}; dissimilarity set to 1",
                        patterns[i].rollcall_id,
                        patterns[j].rollcall_id
                    );
                    warnings.push(PairWarning {
                        first: patterns[i].rollcall_id.clone(),
                        second: patterns[j].rollcall_id.clone(),
                        reason,
                    });
                    1.0
                }
            };
            values[i * n + j] = d;
            values[j * n + i] = d;
        }
    }
    let ids = patterns.iter().map(|p| p.rollcall_id.clone()).collect();
    Ok((DissimilarityMatrix { measure, ids, values }, warnings))
}
