//! End-to-end run: ingest, layer extraction, per-layer CC, dissimilarities,
//! k sweep and clustering, characteristic patterns, reports.

use std::collections::BTreeSet;
use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::time::{Duration, Instant};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::cc::{solve_exact, Partition, SolveLimits};
use crate::characteristic::{
    characteristic_pattern, summarize_pattern, AbstentionistRule, CharacteristicPattern, ConsensusGraph, FactionSummary,
};
use crate::clustering::{k_medoids, silhouette, sweep_k, Clustering, SweepReport};
use crate::error::{Error, Result};
use crate::ingest::{filter_matrix, parse_vote_table_with, IngestOptions, MatrixFilter, VoteMatrix};
use crate::metrics::{dissimilarity_matrix, DissimilarityMatrix, Measure, PairWarning, Pattern};
use crate::multiplex::{extract_multiplex, AbstentionPolicy, MultiplexGraph};
use crate::rng::sub_seed;

/// Number of clusters: a fixed value or the silhouette maximizer.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(try_from = "KRaw", into = "KRaw")]
pub enum KChoice {
    #[default]
    Auto,
    Fixed(usize),
}

#[derive(Serialize, Deserialize)]
#[serde(untagged)]
enum KRaw {
    Num(usize),
    Text(String),
}

impl TryFrom<KRaw> for KChoice {
    type Error = Error;

    fn try_from(raw: KRaw) -> Result<Self> {
        match raw {
            KRaw::Num(k) => KChoice::from_str(&k.to_string()),
            KRaw::Text(s) => KChoice::from_str(&s),
        }
    }
}

impl From<KChoice> for KRaw {
    fn from(k: KChoice) -> Self {
        match k {
            KChoice::Auto => KRaw::Text("auto".into()),
            KChoice::Fixed(k) => KRaw::Num(k),
        }
    }
}

impl FromStr for KChoice {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if s.eq_ignore_ascii_case("auto") {
            return Ok(KChoice::Auto);
        }
        match s.parse::<usize>() {
            Ok(k) if k >= 1 => Ok(KChoice::Fixed(k)),
            _ => Err(Error::Config(format!(
                "k must be \"auto\" or a positive integer, got {s:?}"
            ))),
        }
    }
}

impl fmt::Display for KChoice {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            KChoice::Auto => f.write_str("auto"),
            KChoice::Fixed(k) => write!(f, "{k}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InputPaths {
    pub votes: PathBuf,
    pub voters: PathBuf,
    pub docs: PathBuf,
    /// Allowed subdomain labels; unchecked when absent.
    #[serde(default)]
    pub taxonomy: Option<BTreeSet<String>>,
    /// Allowed political groups; unchecked when absent.
    #[serde(default)]
    pub groups: Option<BTreeSet<String>>,
}

impl InputPaths {
    /// The three tables under their default names in `dir`.
    pub fn in_dir(dir: &Path) -> Self {
        InputPaths {
            votes: dir.join("votes.csv"),
            voters: dir.join("voters.csv"),
            docs: dir.join("docs.csv"),
            taxonomy: None,
            groups: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CcConfig {
    /// Seconds per graph.
    #[serde(default = "default_time_limit")]
    pub time_limit: f64,
    #[serde(default)]
    pub node_limit: Option<u64>,
}

fn default_time_limit() -> f64 {
    60.0
}

impl Default for CcConfig {
    fn default() -> Self {
        CcConfig {
            time_limit: default_time_limit(),
            node_limit: None,
        }
    }
}

impl CcConfig {
    pub fn limits(&self) -> SolveLimits {
        SolveLimits {
            time: Some(Duration::from_secs_f64(self.time_limit)),
            nodes: self.node_limit,
        }
    }
}

fn default_k_min() -> usize {
    2
}
fn default_k_max() -> usize {
    10
}
fn default_restarts() -> usize {
    20
}
fn default_threshold() -> f64 {
    0.5
}
fn default_near_tie() -> f64 {
    0.02
}
fn default_out_dir() -> PathBuf {
    PathBuf::from("out")
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub input: InputPaths,
    #[serde(default)]
    pub filter: MatrixFilter,
    #[serde(default)]
    pub abstention: AbstentionPolicy,
    #[serde(default)]
    pub measure: Measure,
    #[serde(default)]
    pub k: KChoice,
    pub seed: u64,
    #[serde(default = "default_k_min")]
    pub k_min: usize,
    /// Upper end of the sweep, capped at the number of patterns.
    #[serde(default = "default_k_max")]
    pub k_max: usize,
    #[serde(default = "default_restarts")]
    pub restarts: usize,
    #[serde(default)]
    pub cc: CcConfig,
    #[serde(default = "default_threshold")]
    pub participation_threshold: f64,
    #[serde(default)]
    pub abstentionist: AbstentionistRule,
    /// Silhouette gap under which other k values are reported as near-ties.
    #[serde(default = "default_near_tie")]
    pub near_tie: f64,
    #[serde(default)]
    pub jobs: Option<usize>,
    #[serde(default = "default_out_dir")]
    pub out_dir: PathBuf,
}

impl RunConfig {
    /// Defaults for everything but the inputs and the seed.
    pub fn new(input: InputPaths, seed: u64) -> Self {
        RunConfig {
            input,
            filter: MatrixFilter::default(),
            abstention: AbstentionPolicy::default(),
            measure: Measure::default(),
            k: KChoice::Auto,
            seed,
            k_min: default_k_min(),
            k_max: default_k_max(),
            restarts: default_restarts(),
            cc: CcConfig::default(),
            participation_threshold: default_threshold(),
            abstentionist: AbstentionistRule::default(),
            near_tie: default_near_tie(),
            jobs: None,
            out_dir: default_out_dir(),
        }
    }

    pub fn from_toml_str(text: &str) -> Result<Self> {
        let config: RunConfig = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        config.validate()?;
        Ok(config)
    }

    /// Reads a TOML file; relative paths inside it are resolved against its directory.
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let mut config = Self::from_toml_str(&text)?;
        let base = path.parent().unwrap_or(Path::new(""));
        for p in [
            &mut config.input.votes,
            &mut config.input.voters,
            &mut config.input.docs,
            &mut config.out_dir,
        ] {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        }
        Ok(config)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::Config(m));
        if self.k_min < 2 || self.k_max < self.k_min {
            return bad(format!(
                "k range {}..={} must satisfy 2 <= k_min <= k_max",
                self.k_min, self.k_max
            ));
        }
        if self.restarts == 0 {
            return bad("restarts must be at least 1".into());
        }
        if !(self.cc.time_limit.is_finite() && self.cc.time_limit > 0.0) {
            return bad(format!(
                "cc.time_limit must be a positive number of seconds, got {}",
                self.cc.time_limit
            ));
        }
        if !(self.participation_threshold > 0.0 && self.participation_threshold <= 1.0) {
            return bad(format!(
                "participation_threshold {} outside (0, 1]",
                self.participation_threshold
            ));
        }
        let r = self.abstentionist;
        if !(0.0..=1.0).contains(&r.rollcall_share) || !(0.0..=1.0).contains(&r.member_share) {
            return bad("abstentionist shares must lie in [0, 1]".into());
        }
        if !(self.near_tie.is_finite() && self.near_tie >= 0.0) {
            return bad(format!("near_tie {} must be non-negative", self.near_tie));
        }
        if self.jobs == Some(0) {
            return bad("jobs must be at least 1".into());
        }
        Ok(())
    }
}

/// Optimal partition of one roll-call's layer.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LayerResult {
    pub rollcall_id: String,
    pub n_nodes: usize,
    pub partition: Partition,
    pub cost: f64,
    pub optimal: bool,
    pub nodes_explored: u64,
}

impl LayerResult {
    pub fn pattern(&self) -> Pattern {
        Pattern {
            rollcall_id: self.rollcall_id.clone(),
            partition: self.partition.clone(),
        }
    }
}

/// CC on every non-degenerate layer, in layer order. Also returns the ids of
/// the degenerate layers (fewer than two participants).
pub fn solve_layers(mux: &MultiplexGraph, limits: SolveLimits) -> Result<(Vec<LayerResult>, Vec<String>)> {
    let degenerate = mux.degenerate_layers().into_iter().map(String::from).collect();
    let results = mux
        .layers
        .par_iter()
        .filter(|l| !l.is_degenerate())
        .map(|l| {
            let s = solve_exact(&l.to_graph()?, limits)?;
            if !s.optimal {
                log::warn!(
                    "layer {}: solver stopped on a limit, cost {} not proven optimal",
                    l.rollcall_id,
                    s.cost
                );
            }
            Ok(LayerResult {
                rollcall_id: l.rollcall_id.clone(),
                n_nodes: l.n(),
                partition: s.partition,
                cost: s.cost,
                optimal: s.optimal,
                nodes_explored: s.nodes_explored,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok((results, degenerate))
}

pub fn write_layers_json(layers: &[LayerResult], path: &Path) -> Result<()> {
    write_json(layers, path)
}

pub fn read_layers_json(path: &Path) -> Result<Vec<LayerResult>> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    Ok(serde_json::from_str(&text)?)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClusterStage {
    /// Absent when there was a single pattern.
    pub sweep: Option<SweepReport>,
    pub chosen_k: usize,
    pub near_ties: Vec<usize>,
    pub clustering: Clustering,
    /// Roll-call id per clustered pattern, in matrix order.
    pub ids: Vec<String>,
}

impl ClusterStage {
    /// The single cluster used when only one pattern is available.
    pub fn single(id: String) -> Self {
        ClusterStage {
            sweep: None,
            chosen_k: 1,
            near_ties: vec![],
            clustering: Clustering {
                k: 1,
                labels: vec![0],
                medoids: vec![0],
                cost: 0.0,
            },
            ids: vec![id],
        }
    }
}

pub fn cluster_patterns(
    d: &DissimilarityMatrix,
    config: &RunConfig,
    warnings: &mut Vec<String>,
) -> Result<ClusterStage> {
    let n = d.len();
    let seed = sub_seed(config.seed, "k-medoids");
    let ids = d.ids.clone();
    if let KChoice::Fixed(k) = config.k {
        if k > n {
            return Err(Error::OutOfRange("k", format!("{k} exceeds the {n} patterns")));
        }
    }
    let k_max = config.k_max.min(n);
    let sweep = if config.k_min <= k_max {
        Some(sweep_k(d, config.k_min, k_max, seed, config.restarts)?)
    } else {
        warnings.push(format!(
            "k sweep skipped: only {n} patterns for k_min = {}",
            config.k_min
        ));
        None
    };
    let (chosen_k, clustering) = match (config.k, &sweep) {
        (KChoice::Auto, Some(s)) => {
            let k = s.best_k();
            (k, s.entry(k).expect("best k is in the sweep").clustering.clone())
        }
        (KChoice::Auto, None) => (1, k_medoids(d, 1, seed, config.restarts)?),
        (KChoice::Fixed(k), s) => match s.as_ref().and_then(|s| s.entry(k)) {
            Some(e) => (k, e.clustering.clone()),
            None => (k, k_medoids(d, k, seed, config.restarts)?),
        },
    };
    let near_ties = match &sweep {
        Some(s) => {
            let best = s.best_k();
            let ties: Vec<usize> = s
                .near_best(config.near_tie)
                .into_iter()
                .filter(|&k| k != best)
                .collect();
            if !ties.is_empty() {
                let best_s = s.entry(best).unwrap().silhouette;
                warnings.push(format!(
                    "silhouette near-ties with k = {best} (S = {best_s:.4}) within {}: k in {ties:?}",
                    config.near_tie
                ));
            }
            ties
        }
        None => vec![],
    };
    Ok(ClusterStage {
        sweep,
        chosen_k,
        near_ties,
        clustering,
        ids,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClusterReport {
    /// From 1.
    pub cluster: usize,
    pub size: usize,
    pub proportion: f64,
    pub medoid: String,
    pub characteristic: CharacteristicPattern,
    pub factions: Vec<FactionSummary>,
}

/// Characteristic pattern and faction table per cluster, clusters in parallel.
pub fn characterize(
    patterns: &[Pattern],
    stage: &ClusterStage,
    matrix: &VoteMatrix,
    config: &RunConfig,
) -> Result<Vec<(ClusterReport, ConsensusGraph)>> {
    let c = &stage.clustering;
    if c.labels.len() != patterns.len() {
        return Err(Error::UniverseMismatch(format!(
            "{} cluster labels for {} patterns",
            c.labels.len(),
            patterns.len()
        )));
    }
    for (p, id) in patterns.iter().zip(&stage.ids) {
        if &p.rollcall_id != id {
            return Err(Error::UniverseMismatch(format!(
                "pattern {} where {id} was clustered",
                p.rollcall_id
            )));
        }
    }
    let total = patterns.len() as f64;
    let limits = config.cc.limits();
    (0..c.k)
        .into_par_iter()
        .map(|cluster| {
            let members = c.members(cluster);
            let cluster_patterns: Vec<&Pattern> = members.iter().map(|&i| &patterns[i]).collect();
            let (cp, consensus) =
                characteristic_pattern(cluster + 1, &cluster_patterns, config.participation_threshold, limits)?;
            let factions = summarize_pattern(&cp, matrix, config.abstentionist);
            Ok((
                ClusterReport {
                    cluster: cluster + 1,
                    size: members.len(),
                    proportion: members.len() as f64 / total,
                    medoid: patterns[c.medoids[cluster]].rollcall_id.clone(),
                    characteristic: cp,
                    factions,
                },
                consensus,
            ))
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportSettings {
    pub seed: u64,
    pub abstention: AbstentionPolicy,
    pub measure: Measure,
    pub k: KChoice,
    pub k_min: usize,
    pub k_max: usize,
    pub restarts: usize,
    pub participation_threshold: f64,
    pub filter: MatrixFilter,
}

/// Everything a run produces except wall-clock timings.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub settings: ReportSettings,
    pub n_voters: usize,
    pub n_rollcalls: usize,
    pub missing_cells: usize,
    pub degenerate_layers: Vec<String>,
    pub layers: Vec<LayerResult>,
    pub pair_warnings: Vec<PairWarning>,
    pub sweep: Option<SweepReport>,
    pub chosen_k: usize,
    pub near_ties: Vec<usize>,
    pub clusters: Vec<ClusterReport>,
    pub warnings: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StageTiming {
    pub stage: String,
    pub seconds: f64,
}

#[derive(Debug, Clone)]
pub struct RunOutput {
    pub report: RunReport,
    pub consensus: Vec<ConsensusGraph>,
    pub dissimilarity: Option<DissimilarityMatrix>,
    pub timings: Vec<StageTiming>,
}

struct Clock(Vec<StageTiming>, Instant);

impl Clock {
    fn lap(&mut self, stage: &str) {
        let now = Instant::now();
        self.0.push(StageTiming {
            stage: stage.into(),
            seconds: (now - self.1).as_secs_f64(),
        });
        self.1 = now;
    }
}

/// Runs `f` on a pool of `jobs` threads, or the global pool.
pub fn with_jobs<T: Send>(jobs: Option<usize>, f: impl FnOnce() -> T + Send) -> Result<T> {
    match jobs {
        Some(n) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build()
                .map_err(|e| Error::Config(e.to_string()))?;
            Ok(pool.install(f))
        }
        None => Ok(f()),
    }
}

pub fn load_matrix(config: &RunConfig) -> Result<(VoteMatrix, usize)> {
    let opts = IngestOptions {
        taxonomy: config.input.taxonomy.clone(),
        groups: config.input.groups.clone(),
    };
    let parsed = parse_vote_table_with(&config.input.votes, &config.input.voters, &config.input.docs, &opts)?;
    let matrix = if config.filter.is_empty() {
        parsed.matrix
    } else {
        filter_matrix(&parsed.matrix, &config.filter)?
    };
    Ok((matrix, parsed.missing_cells))
}

pub fn run_pipeline(config: &RunConfig) -> Result<RunOutput> {
    config.validate()?;
    let (matrix, missing) = load_matrix(config).map_err(|e| e.in_stage("ingest"))?;
    with_jobs(config.jobs, || run_on_matrix(&matrix, missing, config))?
}

/// The pipeline from an in-memory vote matrix.
pub fn run_on_matrix(matrix: &VoteMatrix, missing_cells: usize, config: &RunConfig) -> Result<RunOutput> {
    let mut clock = Clock(Vec::new(), Instant::now());
    let mux = extract_multiplex(matrix, config.abstention).map_err(|e| e.in_stage("extract"))?;
    clock.lap("extract");
    let (layers, degenerate) = solve_layers(&mux, config.cc.limits()).map_err(|e| e.in_stage("solve-layers"))?;
    clock.lap("solve-layers");
    let mut output = run_from_layers(matrix, layers, degenerate, config)?;
    output.report.missing_cells = missing_cells;
    clock.0.append(&mut output.timings);
    output.timings = clock.0;
    Ok(output)
}

/// The pipeline from solved layers, e.g. re-imported from `layers.json`.
pub fn run_from_layers(
    matrix: &VoteMatrix,
    layers: Vec<LayerResult>,
    degenerate: Vec<String>,
    config: &RunConfig,
) -> Result<RunOutput> {
    let mut clock = Clock(Vec::new(), Instant::now());
    let mut warnings = Vec::new();
    if !degenerate.is_empty() {
        warnings.push(format!(
            "{} degenerate layers excluded from clustering: {}",
            degenerate.len(),
            degenerate.join(",")
        ));
    }
    let unproven = layers.iter().filter(|l| !l.optimal).count();
    if unproven > 0 {
        warnings.push(format!(
            "{unproven} layer solutions hit a solver limit and are not proven optimal"
        ));
    }
    let patterns: Vec<Pattern> = layers.iter().map(LayerResult::pattern).collect();
    if patterns.is_empty() {
        return Err(Error::EmptySelection("no roll-call has two or more participants".into()).in_stage("distances"));
    }

    let (dissimilarity, pair_warnings, stage) = if patterns.len() == 1 {
        warnings.push(format!(
            "single pattern {}: clustering skipped",
            patterns[0].rollcall_id
        ));
        (None, vec![], ClusterStage::single(patterns[0].rollcall_id.clone()))
    } else {
        let (d, pw) = dissimilarity_matrix(&patterns, config.measure).map_err(|e| e.in_stage("distances"))?;
        clock.lap("distances");
        if !pw.is_empty() {
            warnings.push(format!(
                "{} pattern pairs had an undefined similarity and were set to distance 1",
                pw.len()
            ));
        }
        let stage = cluster_patterns(&d, config, &mut warnings).map_err(|e| e.in_stage("cluster"))?;
        clock.lap("cluster");
        (Some(d), pw, stage)
    };

    let characterized = characterize(&patterns, &stage, matrix, config).map_err(|e| e.in_stage("characterize"))?;
    clock.lap("characterize");
    let (clusters, consensus): (Vec<ClusterReport>, Vec<ConsensusGraph>) = characterized.into_iter().unzip();
    for c in &clusters {
        if !c.characteristic.optimal {
            warnings.push(format!(
                "cluster {}: characteristic pattern not proven optimal",
                c.cluster
            ));
        }
        if !c.characteristic.excluded.is_empty() {
            warnings.push(format!(
                "cluster {}: {} low-participation voters excluded",
                c.cluster,
                c.characteristic.excluded.len()
            ));
        }
    }

    let report = RunReport {
        settings: ReportSettings {
            seed: config.seed,
            abstention: config.abstention,
            measure: config.measure,
            k: config.k,
            k_min: config.k_min,
            k_max: config.k_max,
            restarts: config.restarts,
            participation_threshold: config.participation_threshold,
            filter: config.filter.clone(),
        },
        n_voters: matrix.n_voters(),
        n_rollcalls: matrix.n_rollcalls(),
        missing_cells: 0,
        degenerate_layers: degenerate,
        layers,
        pair_warnings,
        sweep: stage.sweep,
        chosen_k: stage.chosen_k,
        near_ties: stage.near_ties,
        clusters,
        warnings,
    };
    Ok(RunOutput {
        report,
        consensus,
        dissimilarity,
        timings: clock.0,
    })
}

fn write_json<T: Serialize + ?Sized>(value: &T, path: &Path) -> Result<()> {
    let text = serde_json::to_string_pretty(value)? + "\n";
    std::fs::write(path, text).map_err(|e| Error::io(path, e))
}

pub fn write_cluster_stage(stage: &ClusterStage, path: &Path) -> Result<()> {
    write_json(stage, path)
}

pub fn read_cluster_stage(path: &Path) -> Result<ClusterStage> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    Ok(serde_json::from_str(&text)?)
}

/// Writes the cluster files: `cluster_<i>_pattern.json` and `cluster_<i>_consensus.edgelist`.
pub fn write_cluster_files(clusters: &[ClusterReport], consensus: &[ConsensusGraph], dir: &Path) -> Result<()> {
    for (c, g) in clusters.iter().zip(consensus) {
        write_json(c, &dir.join(format!("cluster_{}_pattern.json", c.cluster)))?;
        g.graph
            .write_edge_list(&dir.join(format!("cluster_{}_consensus.edgelist", c.cluster)))?;
    }
    Ok(())
}

/// Writes `report.json`, `timings.json`, `sweep.csv`, `alluvial.csv`,
/// `distances.csv` and the per-cluster files into `dir`.
pub fn write_outputs(output: &RunOutput, dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    write_json(&output.report, &dir.join("report.json"))?;
    write_json(&output.timings, &dir.join("timings.json"))?;
    if let Some(s) = &output.report.sweep {
        s.write_sweep_csv(&dir.join("sweep.csv"))?;
        s.write_alluvial_csv(&dir.join("alluvial.csv"))?;
    }
    if let Some(d) = &output.dissimilarity {
        d.write_csv(&dir.join("distances.csv"))?;
    }
    write_cluster_files(&output.report.clusters, &output.consensus, dir)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MeasureSummary {
    pub measure: Measure,
    pub best_k: usize,
    pub best_silhouette: f64,
    /// `(k, silhouette)` over the sweep.
    pub silhouettes: Vec<(usize, f64)>,
}

/// Silhouette sweep of the same patterns under each of the four measures.
pub fn compare_patterns(patterns: &[Pattern], config: &RunConfig) -> Result<Vec<MeasureSummary>> {
    let n = patterns.len();
    let k_max = config.k_max.min(n);
    if config.k_min > k_max {
        return Err(Error::OutOfRange(
            "k range",
            format!("{}..={k_max} with {n} patterns", config.k_min),
        ));
    }
    let seed = sub_seed(config.seed, "k-medoids");
    Measure::ALL
        .iter()
        .map(|&m| {
            let (d, _) = dissimilarity_matrix(patterns, m)?;
            let sweep = sweep_k(&d, config.k_min, k_max, seed, config.restarts)?;
            let best_k = sweep.best_k();
            Ok(MeasureSummary {
                measure: m,
                best_k,
                best_silhouette: sweep.entry(best_k).unwrap().silhouette,
                silhouettes: sweep.entries.iter().map(|e| (e.k, e.silhouette)).collect(),
            })
        })
        .collect()
}

pub fn compare_measures(config: &RunConfig) -> Result<Vec<MeasureSummary>> {
    config.validate()?;
    let (matrix, _) = load_matrix(config).map_err(|e| e.in_stage("ingest"))?;
    with_jobs(config.jobs, || {
        let mux = extract_multiplex(&matrix, config.abstention).map_err(|e| e.in_stage("extract"))?;
        let (layers, _) = solve_layers(&mux, config.cc.limits()).map_err(|e| e.in_stage("solve-layers"))?;
        let patterns: Vec<Pattern> = layers.iter().map(LayerResult::pattern).collect();
        compare_patterns(&patterns, config).map_err(|e| e.in_stage("compare-measures"))
    })?
}

/// Silhouette of an arbitrary labelling, e.g. a ground truth.
pub fn labelling_silhouette(d: &DissimilarityMatrix, labels: &[usize]) -> Result<f64> {
    let k = labels.iter().max().map_or(0, |m| m + 1);
    let medoids = (0..k)
        .map(|c| labels.iter().position(|&l| l == c).ok_or(Error::EmptyCluster))
        .collect::<Result<Vec<_>>>()?;
    silhouette(d, &Clustering::from_parts(labels.to_vec(), medoids, 0.0)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::synth::{generate_synthetic, SyntheticSpec};

    fn synthetic_config(dir: &Path, seed: u64) -> RunConfig {
        generate_synthetic(&SyntheticSpec::three_patterns(seed))
            .unwrap()
            .write(dir)
            .unwrap();
        RunConfig::new(InputPaths::in_dir(dir), seed)
    }

    #[test]
    fn k_choice_parsing() {
        assert_eq!("auto".parse::<KChoice>().unwrap(), KChoice::Auto);
        assert_eq!("AUTO".parse::<KChoice>().unwrap(), KChoice::Auto);
        assert_eq!("5".parse::<KChoice>().unwrap(), KChoice::Fixed(5));
        assert!("0".parse::<KChoice>().is_err());
        assert!("five".parse::<KChoice>().is_err());
    }

    #[test]
    fn config_from_toml() {
        let text = r#"
            seed = 7
            k = 5
            measure = "nmi"
            abstention = "drop"
            [input]
            votes = "v.csv"
            voters = "m.csv"
            docs = "d.csv"
            [filter]
            countries = ["FR"]
            date_from = "2012-07-01"
            [cc]
            time_limit = 5
        "#;
        let c = RunConfig::from_toml_str(text).unwrap();
        assert_eq!(c.k, KChoice::Fixed(5));
        assert_eq!(c.measure, Measure::Nmi);
        assert_eq!(c.abstention, AbstentionPolicy::Drop);
        assert_eq!(c.cc.time_limit, 5.0);
        assert_eq!(c.restarts, 20);
        assert_eq!(c.filter.countries, Some(["FR".to_string()].into()));

        let auto = text.replace("k = 5", "k = \"auto\"");
        assert_eq!(RunConfig::from_toml_str(&auto).unwrap().k, KChoice::Auto);

        // seed is mandatory
        assert!(RunConfig::from_toml_str(&text.replace("seed = 7", "")).is_err());
        assert!(RunConfig::from_toml_str(&text.replace("\"nmi\"", "\"jaccard\"")).is_err());
        assert!(RunConfig::from_toml_str(&text.replace("\"drop\"", "\"maybe\"")).is_err());
        assert!(RunConfig::from_toml_str(&format!("{text}\n[extra]\nx = 1")).is_err());
        assert!(RunConfig::from_toml_str(&text.replace("time_limit = 5", "time_limit = 0")).is_err());
    }

    #[test]
    fn config_paths_resolve_against_file() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("run.toml");
        std::fs::write(
            &path,
            "seed = 1\n[input]\nvotes = \"a.csv\"\nvoters = \"/abs/b.csv\"\ndocs = \"c.csv\"\n",
        )
        .unwrap();
        let c = RunConfig::load(&path).unwrap();
        assert_eq!(c.input.votes, dir.path().join("a.csv"));
        assert_eq!(c.input.voters, PathBuf::from("/abs/b.csv"));
        assert_eq!(c.out_dir, dir.path().join("out"));
    }

    #[test]
    fn synthetic_run_recovers_planted_structure() {
        let dir = tempfile::tempdir().unwrap();
        let config = synthetic_config(dir.path(), 21);
        let out = run_pipeline(&config).unwrap();
        let r = &out.report;
        assert_eq!(r.chosen_k, 3);
        assert_eq!(r.clusters.iter().map(|c| c.size).sum::<usize>(), r.layers.len());
        let total: f64 = r.clusters.iter().map(|c| c.proportion).sum();
        assert!((total - 1.0).abs() < 1e-12);
        assert!(r.degenerate_layers.is_empty());
    }

    #[test]
    fn single_rollcall_skips_clustering() {
        let spec = SyntheticSpec {
            n_rollcalls: 1,
            ..SyntheticSpec::three_patterns(4)
        };
        let data = generate_synthetic(&spec).unwrap();
        let config = RunConfig::new(InputPaths::in_dir(Path::new("unused")), 4);
        let out = run_on_matrix(&data.matrix, 0, &config).unwrap();
        let r = &out.report;
        assert_eq!(r.chosen_k, 1);
        assert!(r.sweep.is_none());
        assert!(r.warnings.iter().any(|w| w.contains("clustering skipped")));
        assert_eq!(r.clusters.len(), 1);
        assert_eq!(r.clusters[0].characteristic.partition, r.layers[0].partition);
        assert_eq!(r.clusters[0].characteristic.cost, 0.0);
    }

    #[test]
    fn degenerate_layers_are_listed() {
        use crate::ingest::VoteValue;
        let data = generate_synthetic(&SyntheticSpec {
            n_rollcalls: 8,
            ..SyntheticSpec::three_patterns(9)
        })
        .unwrap();
        let m = &data.matrix;
        // blank out all but one voter on the first roll-call
        let mut votes = Vec::new();
        for v in 0..m.n_voters() {
            for r in 0..m.n_rollcalls() {
                votes.push(if r == 0 && v > 0 {
                    VoteValue::Absent
                } else {
                    m.vote(v, r)
                });
            }
        }
        let m = VoteMatrix::new(m.voters().to_vec(), m.rollcalls().to_vec(), votes).unwrap();
        let config = RunConfig::new(InputPaths::in_dir(Path::new("unused")), 9);
        let r = run_on_matrix(&m, 0, &config).unwrap().report;
        assert_eq!(r.degenerate_layers, ["rc0001"]);
        assert_eq!(r.layers.len(), 7);
        assert_eq!(r.clusters.iter().map(|c| c.size).sum::<usize>(), 7);
    }

    #[test]
    fn stage_errors_name_the_stage() {
        let config = RunConfig::new(InputPaths::in_dir(Path::new("/nonexistent/dir")), 1);
        let err = run_pipeline(&config).unwrap_err();
        assert!(matches!(err, Error::Stage { stage: "ingest", .. }));
        assert!(err.to_string().contains("ingest"));
    }

    #[test]
    fn resume_from_layers_matches_full_run() {
        let dir = tempfile::tempdir().unwrap();
        let config = synthetic_config(dir.path(), 5);
        let full = run_pipeline(&config).unwrap();
        let (matrix, missing) = load_matrix(&config).unwrap();
        let layers_path = dir.path().join("layers.json");
        write_layers_json(&full.report.layers, &layers_path).unwrap();
        let layers = read_layers_json(&layers_path).unwrap();
        let mut resumed = run_from_layers(&matrix, layers, full.report.degenerate_layers.clone(), &config).unwrap();
        resumed.report.missing_cells = missing;
        assert_eq!(
            serde_json::to_string(&resumed.report).unwrap(),
            serde_json::to_string(&full.report).unwrap()
        );
    }

    #[test]
    fn outputs_written() {
        let dir = tempfile::tempdir().unwrap();
        let config = synthetic_config(dir.path(), 3);
        let out = run_pipeline(&config).unwrap();
        let o = dir.path().join("out");
        write_outputs(&out, &o).unwrap();
        for f in [
            "report.json",
            "timings.json",
            "sweep.csv",
            "alluvial.csv",
            "distances.csv",
        ] {
            assert!(o.join(f).exists(), "{f}");
        }
        for c in 1..=out.report.chosen_k {
            assert!(o.join(format!("cluster_{c}_pattern.json")).exists());
            assert!(o.join(format!("cluster_{c}_consensus.edgelist")).exists());
        }
    }

    #[test]
    fn identical_patterns_give_flat_silhouettes() {
        let p = Pattern {
            rollcall_id: "r".into(),
            partition: Partition::new(vec![vec!["a", "b"], vec!["c"]]).unwrap(),
        };
        let patterns: Vec<Pattern> = (0..6)
            .map(|i| Pattern {
                rollcall_id: format!("r{i}"),
                ..p.clone()
            })
            .collect();
        let config = RunConfig {
            k_max: 4,
            ..RunConfig::new(InputPaths::in_dir(Path::new("unused")), 1)
        };
        for s in compare_patterns(&patterns, &config).unwrap() {
            assert!(s.best_silhouette.abs() < 1e-12, "{s:?}");
        }
    }
}
