//! Synthetic roll-call data with planted voting patterns and known ground truth.

use std::path::Path;

use chrono::{Days, NaiveDate};
use rand::distributions::{Distribution, WeightedIndex};
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::cc::Partition;
use crate::error::{Error, Result};
use crate::ingest::{write_vote_table, DocumentMeta, VoteMatrix, VoteValue, Voter, AGRI_SUBDOMAINS};
use crate::rng::stream;

/// One planted pattern: the vote each voter casts when a roll-call draws it.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PlantedPattern {
    pub votes: Vec<VoteValue>,
}

impl PlantedPattern {
    /// Consecutive runs of voters casting the same vote.
    pub fn from_runs(runs: &[(usize, VoteValue)]) -> Self {
        PlantedPattern {
            votes: runs.iter().flat_map(|&(n, v)| std::iter::repeat_n(v, n)).collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SyntheticSpec {
    pub n_voters: usize,
    pub n_rollcalls: usize,
    pub patterns: Vec<PlantedPattern>,
    /// Mixture weights over `patterns`; uniform when absent.
    #[serde(default)]
    pub weights: Option<Vec<f64>>,
    /// Probability that a cast vote is replaced by one of the two other cast values.
    #[serde(default)]
    pub noise: f64,
    /// Probability that a cell is blanked to ABSENT.
    #[serde(default)]
    pub absence: f64,
    pub seed: u64,
    /// Political group per voter; defaults to four equal contiguous groups `G1..G4`.
    #[serde(default)]
    pub groups: Option<Vec<String>>,
}

impl SyntheticSpec {
    /// 40 voters in four groups of ten, 60 roll-calls, three planted patterns,
    /// 5% noise and 10% absence.
    pub fn three_patterns(seed: u64) -> Self {
        use VoteValue::*;
        SyntheticSpec {
            n_voters: 40,
            n_rollcalls: 60,
            patterns: vec![
                PlantedPattern::from_runs(&[(20, For), (20, Against)]),
                PlantedPattern::from_runs(&[(10, For), (20, Against), (10, Abstain)]),
                PlantedPattern::from_runs(&[(10, Against), (10, For), (10, Abstain), (10, For)]),
            ],
            weights: None,
            noise: 0.05,
            absence: 0.10,
            seed,
            groups: None,
        }
    }

    /// Reads a TOML spec.
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        toml::from_str(&text).map_err(|e| Error::Synthetic(format!("{}: {e}", path.display())))
    }

    fn validate(&self) -> Result<Vec<f64>> {
        let bad = |m: String| Err(Error::Synthetic(m));
        if self.n_voters == 0 || self.n_rollcalls == 0 {
            return bad("n_voters and n_rollcalls must be positive".into());
        }
        if self.patterns.is_empty() {
            return bad("at least one planted pattern is required".into());
        }
        for (i, p) in self.patterns.iter().enumerate() {
            if p.votes.len() != self.n_voters {
                return bad(format!(
                    "pattern {i} has {} votes for {} voters",
                    p.votes.len(),
                    self.n_voters
                ));
            }
            if p.votes.contains(&VoteValue::Absent) {
                return bad(format!("pattern {i} plants ABSENT; use the absence rate instead"));
            }
        }
        let weights = self.weights.clone().unwrap_or_else(|| vec![1.0; self.patterns.len()]);
        if weights.len() != self.patterns.len() {
            return bad(format!(
                "{} weights for {} patterns",
                weights.len(),
                self.patterns.len()
            ));
        }
        if weights.iter().any(|w| !w.is_finite() || *w < 0.0) || weights.iter().sum::<f64>() <= 0.0 {
            return bad("weights must be non-negative with a positive sum".into());
        }
        for (name, rate) in [("noise", self.noise), ("absence", self.absence)] {
            if !(0.0..1.0).contains(&rate) {
                return bad(format!("{name} rate {rate} outside [0, 1)"));
            }
        }
        if let Some(g) = &self.groups {
            if g.len() != self.n_voters {
                return bad(format!("{} groups for {} voters", g.len(), self.n_voters));
            }
        }
        Ok(weights)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SyntheticTruth {
    /// Planted pattern index per roll-call.
    pub assignment: Vec<usize>,
    /// Each planted pattern as a partition of all voters by vote value.
    pub planted: Vec<Partition>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticData {
    pub matrix: VoteMatrix,
    pub truth: SyntheticTruth,
}

impl SyntheticData {
    /// Writes `votes.csv`, `voters.csv`, `docs.csv` and `truth.json` into `dir`.
    pub fn write(&self, dir: &Path) -> Result<()> {
        std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        write_vote_table(
            &self.matrix,
            &dir.join("votes.csv"),
            &dir.join("voters.csv"),
            &dir.join("docs.csv"),
        )?;
        let path = dir.join("truth.json");
        let json = serde_json::to_string_pretty(&self.truth)?;
        std::fs::write(&path, json + "\n").map_err(|e| Error::io(&path, e))
    }
}

pub fn voter_id(i: usize) -> String {
    format!("v{:03}", i + 1)
}

pub fn generate_synthetic(spec: &SyntheticSpec) -> Result<SyntheticData> {
    let weights = spec.validate()?;
    let pick = WeightedIndex::new(&weights).map_err(|e| Error::Synthetic(e.to_string()))?;
    let mut assign_rng = stream(spec.seed, "synthetic/assignment");
    let mut noise_rng = stream(spec.seed, "synthetic/noise");
    let mut absence_rng = stream(spec.seed, "synthetic/absence");

    let n = spec.n_voters;
    let countries = ["FR", "IT", "DE"];
    let voters: Vec<Voter> = (0..n)
        .map(|i| {
            let group = match &spec.groups {
                Some(g) => g[i].clone(),
                None => format!("G{}", i * 4 / n + 1),
            };
            Voter {
                id: voter_id(i),
                name: format!("Voter {}", i + 1),
                country: countries[i % countries.len()].to_string(),
                party: format!("P-{group}"),
                group,
            }
        })
        .collect();
    let start = NaiveDate::from_ymd_opt(2012, 1, 1).expect("valid date");
    let docs: Vec<DocumentMeta> = (0..spec.n_rollcalls)
        .map(|r| DocumentMeta {
            rollcall_id: format!("rc{:04}", r + 1),
            title: format!("Synthetic roll-call {}", r + 1),
            date: start.checked_add_days(Days::new(r as u64)),
            subdomains: [AGRI_SUBDOMAINS[r % AGRI_SUBDOMAINS.len()].to_string()].into(),
        })
        .collect();

    let assignment: Vec<usize> = (0..spec.n_rollcalls).map(|_| pick.sample(&mut assign_rng)).collect();
    let mut votes = vec![VoteValue::Absent; n * spec.n_rollcalls];
    // column-major generation keeps each roll-call's draws contiguous in the streams
    for (r, &p) in assignment.iter().enumerate() {
        for v in 0..n {
            let planted = spec.patterns[p].votes[v];
            let flip: f64 = noise_rng.gen();
            let other: bool = noise_rng.gen();
            let blank: f64 = absence_rng.gen();
            let mut value = planted;
            if flip < spec.noise {
                let alternatives: Vec<VoteValue> = [VoteValue::For, VoteValue::Against, VoteValue::Abstain]
                    .into_iter()
                    .filter(|&x| x != planted)
                    .collect();
                value = alternatives[other as usize];
            }
            if blank < spec.absence {
                value = VoteValue::Absent;
            }
            votes[v * spec.n_rollcalls + r] = value;
        }
    }

    let ids: Vec<String> = (0..n).map(voter_id).collect();
    let planted = spec
        .patterns
        .iter()
        .map(|p| Partition::from_labels(&ids, &p.votes))
        .collect();
    Ok(SyntheticData {
        matrix: VoteMatrix::new(voters, docs, votes)?,
        truth: SyntheticTruth { assignment, planted },
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cc::{solve_exact, SolveLimits};
    use crate::metrics::purity_harmonic;
    use crate::multiplex::{extract_multiplex, AbstentionPolicy};

    #[test]
    fn noiseless_layers_recover_planted() {
        let spec = SyntheticSpec {
            noise: 0.0,
            absence: 0.0,
            n_rollcalls: 12,
            ..SyntheticSpec::three_patterns(3)
        };
        let data = generate_synthetic(&spec).unwrap();
        let mux = extract_multiplex(&data.matrix, AbstentionPolicy::Keep).unwrap();
        for (layer, &p) in mux.layers.iter().zip(&data.truth.assignment) {
            let s = solve_exact(&layer.to_graph().unwrap(), SolveLimits::default()).unwrap();
            assert_eq!(s.cost, 0.0);
            assert_eq!(s.partition, data.truth.planted[p]);
        }
    }

    #[test]
    fn noisy_layers_stay_close() {
        let data = generate_synthetic(&SyntheticSpec::three_patterns(11)).unwrap();
        let mux = extract_multiplex(&data.matrix, AbstentionPolicy::Keep).unwrap();
        let mut scores = Vec::new();
        for (layer, &p) in mux.layers.iter().zip(&data.truth.assignment) {
            let s = solve_exact(&layer.to_graph().unwrap(), SolveLimits::default()).unwrap();
            let keep = s.partition.members().into_iter().collect();
            let planted = data.truth.planted[p].restrict(&keep);
            scores.push(purity_harmonic(&s.partition, &planted).unwrap());
        }
        // single layers can see twice the nominal flip count
        let mean = scores.iter().sum::<f64>() / scores.len() as f64;
        assert!(mean >= 0.9, "mean purity {mean}");
        assert!(scores.iter().all(|&v| v >= 0.8), "{scores:?}");
    }

    #[test]
    fn deterministic_and_seed_sensitive() {
        let a = generate_synthetic(&SyntheticSpec::three_patterns(5)).unwrap();
        let b = generate_synthetic(&SyntheticSpec::three_patterns(5)).unwrap();
        let c = generate_synthetic(&SyntheticSpec::three_patterns(6)).unwrap();
        assert_eq!(a, b);
        assert_ne!(a.matrix, c.matrix);
    }

    #[test]
    fn rates_are_roughly_honored() {
        let spec = SyntheticSpec {
            n_rollcalls: 500,
            ..SyntheticSpec::three_patterns(1)
        };
        let data = generate_synthetic(&spec).unwrap();
        let m = &data.matrix;
        let (mut absent, mut flipped, mut cast) = (0usize, 0usize, 0usize);
        for r in 0..m.n_rollcalls() {
            let p = &spec.patterns[data.truth.assignment[r]];
            for v in 0..m.n_voters() {
                match m.vote(v, r) {
                    VoteValue::Absent => absent += 1,
                    x => {
                        cast += 1;
                        flipped += (x != p.votes[v]) as usize;
                    }
                }
            }
        }
        let cells = (m.n_voters() * m.n_rollcalls()) as f64;
        assert!((absent as f64 / cells - 0.10).abs() < 0.01);
        assert!((flipped as f64 / cast as f64 - 0.05).abs() < 0.01);
    }

    #[test]
    fn inconsistent_specs() {
        let base = SyntheticSpec::three_patterns(0);
        let cases = [
            SyntheticSpec {
                n_voters: 39,
                ..base.clone()
            },
            SyntheticSpec {
                patterns: vec![],
                ..base.clone()
            },
            SyntheticSpec {
                weights: Some(vec![1.0]),
                ..base.clone()
            },
            SyntheticSpec {
                weights: Some(vec![0.0; 3]),
                ..base.clone()
            },
            SyntheticSpec {
                noise: 1.0,
                ..base.clone()
            },
            SyntheticSpec {
                absence: -0.1,
                ..base.clone()
            },
            SyntheticSpec {
                groups: Some(vec!["A".into()]),
                ..base.clone()
            },
            SyntheticSpec {
                patterns: vec![PlantedPattern::from_runs(&[(40, VoteValue::Absent)])],
                ..base.clone()
            },
        ];
        for spec in cases {
            assert!(
                matches!(generate_synthetic(&spec), Err(Error::Synthetic(_))),
                "{spec:?}"
            );
        }
    }

    #[test]
    fn spec_parses_from_toml() {
        let text = r#"
            n_voters = 3
            n_rollcalls = 2
            seed = 9
            noise = 0.1
            [[patterns]]
            votes = ["FOR", "FOR", "AGAINST"]
        "#;
        let spec: SyntheticSpec = toml::from_str(text).unwrap();
        let data = generate_synthetic(&spec).unwrap();
        assert_eq!(data.truth.assignment, [0, 0]);
        assert_eq!(data.truth.planted[0].to_string(), "{v001,v002 | v003}");
    }

    #[test]
    fn writes_loadable_tables() {
        let dir = tempfile::tempdir().unwrap();
        let data = generate_synthetic(&SyntheticSpec::three_patterns(2)).unwrap();
        data.write(dir.path()).unwrap();
        let p = dir.path();
        let parsed =
            crate::ingest::parse_vote_table(&p.join("votes.csv"), &p.join("voters.csv"), &p.join("docs.csv")).unwrap();
        assert_eq!(parsed.matrix, data.matrix);
        let truth: SyntheticTruth = serde_json::from_slice(&std::fs::read(p.join("truth.json")).unwrap()).unwrap();
        assert_eq!(truth, data.truth);
    }
}
