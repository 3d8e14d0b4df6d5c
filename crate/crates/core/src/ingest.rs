//! Roll-call vote tables: parsing, serialization and row/column filtering.
//!
//! Three UTF-8 CSV files describe a dataset:
//!
//! * `votes.csv`: header `voter_id,<rollcall_1>,...`, one row per voter, cells in
//!   `FOR|AGAINST|ABSTAIN|ABSENT` (case-insensitive, blank = `ABSENT`).
//! * `voters.csv`: `voter_id,name,country,party,group`.
//! * `docs.csv`: `rollcall_id,title,date,subdomains`, subdomains `;`-separated.
//!
//! Voter order follows the rows of `votes.csv` and roll-call order follows its
//! header, so parse and filter are order-stable.

use std::collections::{BTreeSet, HashMap, HashSet};
use std::fmt;
use std::path::Path;
use std::str::FromStr;

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum VoteValue {
    For,
    Against,
    Abstain,
    Absent,
}

impl VoteValue {
    pub const ALL: [VoteValue; 4] = [
        VoteValue::For,
        VoteValue::Against,
        VoteValue::Abstain,
        VoteValue::Absent,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            VoteValue::For => "FOR",
            VoteValue::Against => "AGAINST",
            VoteValue::Abstain => "ABSTAIN",
            VoteValue::Absent => "ABSENT",
        }
    }

    /// Any vote actually cast, abstention included.
    pub fn participated(self) -> bool {
        self != VoteValue::Absent
    }
}

impl fmt::Display for VoteValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for VoteValue {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        let t = s.trim();
        VoteValue::ALL
            .iter()
            .copied()
            .find(|v| v.as_str().eq_ignore_ascii_case(t))
            .ok_or_else(|| format!("unknown vote value {t:?}"))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Voter {
    pub id: String,
    pub name: String,
    pub country: String,
    pub party: String,
    pub group: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DocumentMeta {
    pub rollcall_id: String,
    pub title: String,
    pub date: Option<NaiveDate>,
    pub subdomains: BTreeSet<String>,
}

/// Dense voters × roll-calls table of vote values.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct VoteMatrix {
    voters: Vec<Voter>,
    rollcalls: Vec<DocumentMeta>,
    /// Row-major, `voters.len() * rollcalls.len()` cells.
    votes: Vec<VoteValue>,
}

impl VoteMatrix {
    pub fn new(voters: Vec<Voter>, rollcalls: Vec<DocumentMeta>, votes: Vec<VoteValue>) -> Result<Self> {
        if votes.len() != voters.len() * rollcalls.len() {
            return Err(Error::Config(format!(
                "vote table has {} cells, expected {} x {}",
                votes.len(),
                voters.len(),
                rollcalls.len()
            )));
        }
        let mut seen = HashSet::new();
        for v in &voters {
            if !seen.insert(v.id.as_str()) {
                return Err(Error::Config(format!("duplicate voter id {:?}", v.id)));
            }
        }
        let mut seen = HashSet::new();
        for d in &rollcalls {
            if !seen.insert(d.rollcall_id.as_str()) {
                return Err(Error::Config(format!("duplicate roll-call id {:?}", d.rollcall_id)));
            }
        }
        Ok(VoteMatrix {
            voters,
            rollcalls,
            votes,
        })
    }

    pub fn voters(&self) -> &[Voter] {
        &self.voters
    }

    pub fn rollcalls(&self) -> &[DocumentMeta] {
        &self.rollcalls
    }

    pub fn n_voters(&self) -> usize {
        self.voters.len()
    }

    pub fn n_rollcalls(&self) -> usize {
        self.rollcalls.len()
    }

    pub fn vote(&self, voter: usize, rollcall: usize) -> VoteValue {
        self.votes[voter * self.rollcalls.len() + rollcall]
    }

    pub fn rollcall_index(&self, rollcall_id: &str) -> Option<usize> {
        self.rollcalls.iter().position(|d| d.rollcall_id == rollcall_id)
    }

    pub fn voter_index(&self, voter_id: &str) -> Option<usize> {
        self.voters.iter().position(|v| v.id == voter_id)
    }

    /// One roll-call column, in voter order.
    pub fn column(&self, rollcall: usize) -> impl Iterator<Item = VoteValue> + '_ {
        (0..self.voters.len()).map(move |v| self.vote(v, rollcall))
    }

    fn select(&self, voter_idx: &[usize], rollcall_idx: &[usize]) -> VoteMatrix {
        let mut votes = Vec::with_capacity(voter_idx.len() * rollcall_idx.len());
        for &v in voter_idx {
            for &r in rollcall_idx {
                votes.push(self.vote(v, r));
            }
        }
        VoteMatrix {
            voters: voter_idx.iter().map(|&v| self.voters[v].clone()).collect(),
            rollcalls: rollcall_idx.iter().map(|&r| self.rollcalls[r].clone()).collect(),
            votes,
        }
    }
}

/// Optional label vocabularies checked during parsing.
#[derive(Debug, Clone, Default)]
pub struct IngestOptions {
    pub taxonomy: Option<BTreeSet<String>>,
    pub groups: Option<BTreeSet<String>>,
}

#[derive(Debug, Clone)]
pub struct ParsedVotes {
    pub matrix: VoteMatrix,
    /// Blank cells that were read as `ABSENT`.
    pub missing_cells: usize,
}

/// Third-level AGRI subdomain codes of the EUR-Lex nomenclature for 2012-13.
pub const AGRI_SUBDOMAINS: &[&str] = &[
    "CAPM", "SSM", "PMAP", "GEN", "EAGF", "EAFRD", "AHZ", "SS", "SEED", "WINE", "ACMOMO", "CSI", "PEI", "BANC", "EXT",
];

pub fn agri_taxonomy() -> BTreeSet<String> {
    AGRI_SUBDOMAINS.iter().map(|s| s.to_string()).collect()
}

fn reader(path: &Path) -> Result<csv::Reader<std::fs::File>> {
    let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    Ok(csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::Fields)
        .from_reader(file))
}

fn record_line(rec: &csv::StringRecord) -> u64 {
    rec.position().map(|p| p.line()).unwrap_or(0)
}

fn check_header(path: &Path, header: &csv::StringRecord, expected: &[&str]) -> Result<()> {
    let got: Vec<&str> = header.iter().collect();
    if got != expected {
        return Err(Error::parse(
            path,
            1,
            format!("expected header {:?}, found {:?}", expected.join(","), got.join(",")),
        ));
    }
    Ok(())
}

fn parse_voters(path: &Path, opts: &IngestOptions) -> Result<Vec<Voter>> {
    let mut rdr = reader(path)?;
    check_header(path, rdr.headers()?, &["voter_id", "name", "country", "party", "group"])?;
    let mut out = Vec::new();
    let mut seen = HashSet::new();
    for rec in rdr.records() {
        let rec = rec.map_err(|e| Error::parse(path, e.position().map_or(0, |p| p.line()), e.to_string()))?;
        let line = record_line(&rec);
        let voter = Voter {
            id: rec[0].to_string(),
            name: rec[1].to_string(),
            country: rec[2].to_string(),
            party: rec[3].to_string(),
            group: rec[4].to_string(),
        };
        if voter.id.is_empty() {
            return Err(Error::parse(path, line, "empty voter_id"));
        }
        if !seen.insert(voter.id.clone()) {
            return Err(Error::parse(path, line, format!("duplicate voter_id {:?}", voter.id)));
        }
        if let Some(groups) = &opts.groups {
            if !groups.contains(&voter.group) {
                return Err(Error::parse(path, line, format!("undeclared group {:?}", voter.group)));
            }
        }
        out.push(voter);
    }
    Ok(out)
}

fn parse_docs(path: &Path, opts: &IngestOptions) -> Result<Vec<DocumentMeta>> {
    let mut rdr = reader(path)?;
    check_header(path, rdr.headers()?, &["rollcall_id", "title", "date", "subdomains"])?;
    let mut out = Vec::new();
    let mut seen = HashSet::new();
    for rec in rdr.records() {
        let rec = rec.map_err(|e| Error::parse(path, e.position().map_or(0, |p| p.line()), e.to_string()))?;
        let line = record_line(&rec);
        let id = rec[0].to_string();
        if id.is_empty() {
            return Err(Error::parse(path, line, "empty rollcall_id"));
        }
        if !seen.insert(id.clone()) {
            return Err(Error::parse(path, line, format!("duplicate rollcall_id {id:?}")));
        }
        let date = match &rec[2] {
            "" => None,
            s => Some(
                NaiveDate::parse_from_str(s, "%Y-%m-%d")
                    .map_err(|e| Error::parse(path, line, format!("bad date {s:?}: {e}")))?,
            ),
        };
        let subdomains: BTreeSet<String> = rec[3]
            .split(';')
            .map(str::trim)
            .filter(|s| !s.is_empty())
            .map(String::from)
            .collect();
        if let Some(tax) = &opts.taxonomy {
            if let Some(bad) = subdomains.iter().find(|s| !tax.contains(*s)) {
                return Err(Error::parse(path, line, format!("unknown subdomain {bad:?}")));
            }
        }
        out.push(DocumentMeta {
            rollcall_id: id,
            title: rec[1].to_string(),
            date,
            subdomains,
        });
    }
    Ok(out)
}

pub fn parse_vote_table(votes_path: &Path, voters_path: &Path, docs_path: &Path) -> Result<ParsedVotes> {
    parse_vote_table_with(votes_path, voters_path, docs_path, &IngestOptions::default())
}

pub fn parse_vote_table_with(
    votes_path: &Path,
    voters_path: &Path,
    docs_path: &Path,
    opts: &IngestOptions,
) -> Result<ParsedVotes> {
    let voter_meta = parse_voters(voters_path, opts)?;
    let doc_meta = parse_docs(docs_path, opts)?;

    let mut rdr = reader(votes_path)?;
    let header = rdr.headers()?.clone();
    if header.get(0) != Some("voter_id") {
        return Err(Error::parse(votes_path, 1, "first header column must be voter_id"));
    }
    let docs_by_id: HashMap<&str, &DocumentMeta> = doc_meta.iter().map(|d| (d.rollcall_id.as_str(), d)).collect();
    let mut rollcalls = Vec::with_capacity(header.len() - 1);
    let mut seen = HashSet::new();
    for id in header.iter().skip(1) {
        if !seen.insert(id) {
            return Err(Error::parse(
                votes_path,
                1,
                format!("duplicate roll-call column {id:?}"),
            ));
        }
        let doc = docs_by_id.get(id).ok_or_else(|| {
            Error::parse(
                votes_path,
                1,
                format!("roll-call {id:?} missing from {}", docs_path.display()),
            )
        })?;
        rollcalls.push((*doc).clone());
    }
    if rollcalls.len() != doc_meta.len() {
        return Err(Error::parse(
            docs_path,
            0,
            format!(
                "{} documents described but {} roll-call columns in votes",
                doc_meta.len(),
                rollcalls.len()
            ),
        ));
    }

    let voters_by_id: HashMap<&str, &Voter> = voter_meta.iter().map(|v| (v.id.as_str(), v)).collect();
    let mut voters = Vec::with_capacity(voter_meta.len());
    let mut votes = Vec::with_capacity(voter_meta.len() * rollcalls.len());
    let mut missing_cells = 0;
    let mut seen = HashSet::new();
    for rec in rdr.records() {
        let rec = rec.map_err(|e| Error::parse(votes_path, e.position().map_or(0, |p| p.line()), e.to_string()))?;
        let line = record_line(&rec);
        let id = &rec[0];
        if !seen.insert(id.to_string()) {
            return Err(Error::parse(votes_path, line, format!("duplicate voter_id {id:?}")));
        }
        let voter = voters_by_id.get(id).ok_or_else(|| {
            Error::parse(
                votes_path,
                line,
                format!("voter {id:?} missing from {}", voters_path.display()),
            )
        })?;
        voters.push((*voter).clone());
        for (col, cell) in rec.iter().enumerate().skip(1) {
            if cell.is_empty() {
                missing_cells += 1;
                votes.push(VoteValue::Absent);
                continue;
            }
            let value = cell.parse::<VoteValue>().map_err(|msg| {
                Error::parse(
                    votes_path,
                    line,
                    format!("column {} ({}): {msg}", col + 1, &header[col]),
                )
            })?;
            votes.push(value);
        }
    }
    if voters.len() != voter_meta.len() {
        return Err(Error::parse(
            voters_path,
            0,
            format!("{} voters described but {} vote rows", voter_meta.len(), voters.len()),
        ));
    }
    if missing_cells > 0 {
        log::warn!("{missing_cells} blank vote cells read as ABSENT");
    }
    Ok(ParsedVotes {
        matrix: VoteMatrix::new(voters, rollcalls, votes)?,
        missing_cells,
    })
}

fn writer(path: &Path) -> Result<csv::Writer<std::fs::File>> {
    let file = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
    Ok(csv::Writer::from_writer(file))
}

/// Writes the three CSV files so that [`parse_vote_table`] reads back the same matrix.
pub fn write_vote_table(matrix: &VoteMatrix, votes_path: &Path, voters_path: &Path, docs_path: &Path) -> Result<()> {
    let mut w = writer(votes_path)?;
    let mut header = vec!["voter_id".to_string()];
    header.extend(matrix.rollcalls.iter().map(|d| d.rollcall_id.clone()));
    w.write_record(&header)?;
    for (i, voter) in matrix.voters.iter().enumerate() {
        let mut row = vec![voter.id.clone()];
        row.extend((0..matrix.n_rollcalls()).map(|r| matrix.vote(i, r).as_str().to_string()));
        w.write_record(&row)?;
    }
    w.flush().map_err(|e| Error::io(votes_path, e))?;

    let mut w = writer(voters_path)?;
    w.write_record(["voter_id", "name", "country", "party", "group"])?;
    for v in &matrix.voters {
        w.write_record([&v.id, &v.name, &v.country, &v.party, &v.group])?;
    }
    w.flush().map_err(|e| Error::io(voters_path, e))?;

    let mut w = writer(docs_path)?;
    w.write_record(["rollcall_id", "title", "date", "subdomains"])?;
    for d in &matrix.rollcalls {
        let date = d.date.map(|d| d.format("%Y-%m-%d").to_string()).unwrap_or_default();
        let subs = d.subdomains.iter().cloned().collect::<Vec<_>>().join(";");
        w.write_record([d.rollcall_id.as_str(), d.title.as_str(), date.as_str(), subs.as_str()])?;
    }
    w.flush().map_err(|e| Error::io(docs_path, e))?;
    Ok(())
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct MatrixFilter {
    #[serde(default)]
    pub countries: Option<BTreeSet<String>>,
    /// A roll-call passes when it carries at least one of these labels.
    #[serde(default)]
    pub subdomains: Option<BTreeSet<String>>,
    /// Inclusive date bounds; undated roll-calls fail any date bound.
    #[serde(default)]
    pub date_from: Option<NaiveDate>,
    #[serde(default)]
    pub date_to: Option<NaiveDate>,
}

impl MatrixFilter {
    pub fn is_empty(&self) -> bool {
        self.countries.is_none() && self.subdomains.is_none() && self.date_from.is_none() && self.date_to.is_none()
    }

    fn keeps_voter(&self, v: &Voter) -> bool {
        self.countries.as_ref().is_none_or(|c| c.contains(&v.country))
    }

    fn keeps_doc(&self, d: &DocumentMeta) -> bool {
        if let Some(subs) = &self.subdomains {
            if d.subdomains.is_disjoint(subs) {
                return false;
            }
        }
        if self.date_from.is_some() || self.date_to.is_some() {
            let Some(date) = d.date else { return false };
            if self.date_from.is_some_and(|f| date < f) || self.date_to.is_some_and(|t| date > t) {
                return false;
            }
        }
        true
    }
}

pub fn filter_matrix(matrix: &VoteMatrix, filter: &MatrixFilter) -> Result<VoteMatrix> {
    let voter_idx: Vec<usize> = (0..matrix.n_voters())
        .filter(|&i| filter.keeps_voter(&matrix.voters[i]))
        .collect();
    let rollcall_idx: Vec<usize> = (0..matrix.n_rollcalls())
        .filter(|&r| filter.keeps_doc(&matrix.rollcalls[r]))
        .collect();
    if voter_idx.is_empty() {
        return Err(Error::EmptySelection("no voter passes the filters".into()));
    }
    if rollcall_idx.is_empty() {
        return Err(Error::EmptySelection("no roll-call passes the filters".into()));
    }
    Ok(matrix.select(&voter_idx, &rollcall_idx))
}

#[cfg(test)]
pub(crate) mod fixtures {
    use super::*;

    pub fn voter(id: &str, country: &str, group: &str) -> Voter {
        Voter {
            id: id.into(),
            name: format!("Name {id}"),
            country: country.into(),
            party: format!("P-{group}"),
            group: group.into(),
        }
    }

    pub fn doc(id: &str, date: &str, subs: &[&str]) -> DocumentMeta {
        DocumentMeta {
            rollcall_id: id.into(),
            title: format!("Title, {id}"),
            date: Some(NaiveDate::parse_from_str(date, "%Y-%m-%d").unwrap()),
            subdomains: subs.iter().map(|s| s.to_string()).collect(),
        }
    }

    /// FR/IT mix: three voters, two roll-calls.
    pub fn small() -> VoteMatrix {
        use VoteValue::*;
        VoteMatrix::new(
            vec![
                voter("a", "FR", "EPP"),
                voter("b", "IT", "S&D"),
                voter("c", "FR", "G-EFA"),
            ],
            vec![
                doc("r1", "2012-09-11", &["CAPM"]),
                doc("r2", "2013-03-13", &["SSM", "EAFRD"]),
            ],
            vec![For, Against, For, Abstain, Against, Absent],
        )
        .unwrap()
    }
}

#[cfg(test)]
mod tests {
    use super::fixtures::*;
    use super::*;
    use std::io::Write;

    fn write(dir: &Path, name: &str, body: &str) -> std::path::PathBuf {
        let p = dir.join(name);
        std::fs::File::create(&p).unwrap().write_all(body.as_bytes()).unwrap();
        p
    }

    const VOTERS: &str =
        "voter_id,name,country,party,group\na,Ann,FR,UMP,EPP\nb,Bo,IT,PD,S&D\nc,\"Cy, Jr\",FR,EELV,G-EFA\n";
    const DOCS: &str = "rollcall_id,title,date,subdomains\nr1,First,2012-09-11,CAPM\nr2,Second,2013-03-13,SSM;EAFRD\n";

    #[test]
    fn parses_well_formed_fixture() {
        let dir = tempfile::tempdir().unwrap();
        let votes = write(
            dir.path(),
            "votes.csv",
            "voter_id,r1,r2\na,FOR,against\nb,For,ABSTAIN\nc,AGAINST,ABSENT\n",
        );
        let voters = write(dir.path(), "voters.csv", VOTERS);
        let docs = write(dir.path(), "docs.csv", DOCS);
        let parsed = parse_vote_table(&votes, &voters, &docs).unwrap();
        let m = &parsed.matrix;
        assert_eq!((m.n_voters(), m.n_rollcalls()), (3, 2));
        assert_eq!(parsed.missing_cells, 0);
        assert_eq!(m.vote(0, 1), VoteValue::Against);
        assert_eq!(m.vote(2, 1), VoteValue::Absent);
        assert_eq!(m.voters()[2].name, "Cy, Jr");
        assert_eq!(m.rollcalls()[1].subdomains.len(), 2);
    }

    #[test]
    fn unknown_token_names_row_and_column() {
        let dir = tempfile::tempdir().unwrap();
        let votes = write(
            dir.path(),
            "votes.csv",
            "voter_id,r1,r2\na,FOR,FOR\nb,MAYBE,FOR\nc,FOR,FOR\n",
        );
        let voters = write(dir.path(), "voters.csv", VOTERS);
        let docs = write(dir.path(), "docs.csv", DOCS);
        let err = parse_vote_table(&votes, &voters, &docs).unwrap_err();
        let msg = err.to_string();
        assert!(matches!(err, Error::Parse { line: 3, .. }), "{msg}");
        assert!(msg.contains("MAYBE") && msg.contains("r1"), "{msg}");
    }

    #[test]
    fn blank_cell_is_absent_and_counted() {
        let dir = tempfile::tempdir().unwrap();
        let votes = write(
            dir.path(),
            "votes.csv",
            "voter_id,r1,r2\na,FOR,\nb,FOR,FOR\nc,FOR,FOR\n",
        );
        let voters = write(dir.path(), "voters.csv", VOTERS);
        let docs = write(dir.path(), "docs.csv", DOCS);
        let parsed = parse_vote_table(&votes, &voters, &docs).unwrap();
        assert_eq!(parsed.missing_cells, 1);
        assert_eq!(parsed.matrix.vote(0, 1), VoteValue::Absent);
    }

    #[test]
    fn duplicate_and_mismatch_errors() {
        let dir = tempfile::tempdir().unwrap();
        let voters = write(dir.path(), "voters.csv", VOTERS);
        let docs = write(dir.path(), "docs.csv", DOCS);
        let dup = write(
            dir.path(),
            "dup.csv",
            "voter_id,r1,r2\na,FOR,FOR\na,FOR,FOR\nc,FOR,FOR\n",
        );
        assert!(matches!(
            parse_vote_table(&dup, &voters, &docs),
            Err(Error::Parse { line: 3, .. })
        ));
        let short = write(dir.path(), "short.csv", "voter_id,r1,r2\na,FOR,FOR\nb,FOR\n");
        assert!(matches!(
            parse_vote_table(&short, &voters, &docs),
            Err(Error::Parse { .. })
        ));
        let missing = write(dir.path(), "missing.csv", "voter_id,r1,r2\na,FOR,FOR\nb,FOR,FOR\n");
        assert!(parse_vote_table(&missing, &voters, &docs).is_err());
        let extra_col = write(dir.path(), "extra.csv", "voter_id,r1,r2,r3\na,FOR,FOR,FOR\n");
        assert!(parse_vote_table(&extra_col, &voters, &docs).is_err());
    }

    #[test]
    fn taxonomy_validation() {
        let dir = tempfile::tempdir().unwrap();
        let votes = write(
            dir.path(),
            "votes.csv",
            "voter_id,r1,r2\na,FOR,FOR\nb,FOR,FOR\nc,FOR,FOR\n",
        );
        let voters = write(dir.path(), "voters.csv", VOTERS);
        let docs = write(
            dir.path(),
            "docs.csv",
            "rollcall_id,title,date,subdomains\nr1,x,,CAPM\nr2,y,,NOPE\n",
        );
        let opts = IngestOptions {
            taxonomy: Some(agri_taxonomy()),
            groups: None,
        };
        let err = parse_vote_table_with(&votes, &voters, &docs, &opts).unwrap_err();
        assert!(err.to_string().contains("NOPE"));
        assert!(parse_vote_table(&votes, &voters, &docs).is_ok());
    }

    #[test]
    fn round_trip_through_csv() {
        let m = small();
        let dir = tempfile::tempdir().unwrap();
        let (v, p, d) = (
            dir.path().join("v.csv"),
            dir.path().join("p.csv"),
            dir.path().join("d.csv"),
        );
        write_vote_table(&m, &v, &p, &d).unwrap();
        let back = parse_vote_table(&v, &p, &d).unwrap();
        assert_eq!(back.matrix, m);
    }

    #[test]
    fn filters() {
        let m = small();
        let fr = MatrixFilter {
            countries: Some(["FR".to_string()].into()),
            ..Default::default()
        };
        let out = filter_matrix(&m, &fr).unwrap();
        assert_eq!(
            out.voters().iter().map(|v| v.id.as_str()).collect::<Vec<_>>(),
            ["a", "c"]
        );
        assert_eq!(out.vote(1, 0), VoteValue::Against);
        assert_eq!(filter_matrix(&out, &fr).unwrap(), out);

        assert_eq!(filter_matrix(&m, &MatrixFilter::default()).unwrap(), m);

        let nope = MatrixFilter {
            subdomains: Some(["WINE".to_string()].into()),
            ..Default::default()
        };
        assert!(matches!(filter_matrix(&m, &nope), Err(Error::EmptySelection(_))));

        let dated = MatrixFilter {
            date_from: NaiveDate::from_ymd_opt(2013, 1, 1),
            ..Default::default()
        };
        let out = filter_matrix(&m, &dated).unwrap();
        assert_eq!(out.n_rollcalls(), 1);
        assert_eq!(out.rollcalls()[0].rollcall_id, "r2");
    }
}
