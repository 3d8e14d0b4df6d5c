use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use vote_patterns::cc::SolveLimits;
use vote_patterns::clustering::SweepReport;
use vote_patterns::metrics::{dissimilarity_matrix, DissimilarityMatrix, Measure, Pattern};
use vote_patterns::multiplex::{extract_multiplex, AbstentionPolicy, MultiplexGraph};
use vote_patterns::pipeline::{
    characterize, cluster_patterns, compare_measures, load_matrix, read_cluster_stage, read_layers_json, run_pipeline,
    solve_layers, with_jobs, write_cluster_files, write_cluster_stage, write_layers_json, write_outputs, InputPaths,
    KChoice, LayerResult, RunConfig,
};
use vote_patterns::synth::{generate_synthetic, SyntheticSpec};

/// Voting-behavior patterns from roll-call data.
#[derive(Parser)]
#[command(name = "vote-patterns", version)]
struct Cli {
    #[command(flatten)]
    common: Common,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// TOML run configuration.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Directory with votes.csv, voters.csv and docs.csv (instead of a config's [input]).
    #[arg(long, global = true)]
    data: Option<PathBuf>,
    /// purity, ri, ari or nmi.
    #[arg(long, global = true)]
    measure: Option<Measure>,
    /// Number of clusters or "auto".
    #[arg(long, global = true)]
    k: Option<KChoice>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// keep or drop.
    #[arg(long, global = true)]
    abstention: Option<AbstentionPolicy>,
    #[arg(long, global = true)]
    jobs: Option<usize>,
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Per-graph correlation-clustering limit, seconds.
    #[arg(long, global = true)]
    time_limit: Option<f64>,
}

#[derive(Subcommand)]
enum Command {
    /// Build the signed layers and write multiplex.json.
    Extract,
    /// Solve every layer exactly and write layers.json.
    SolveLayers {
        /// Layers from a previous `extract`; re-extracted from the inputs otherwise.
        #[arg(long)]
        multiplex: Option<PathBuf>,
    },
    /// Pairwise pattern dissimilarities from layers.json, written to distances.csv.
    Distances {
        #[arg(long)]
        layers: PathBuf,
    },
    /// k sweep and clustering from distances.csv.
    Cluster {
        #[arg(long)]
        distances: PathBuf,
    },
    /// Characteristic pattern of each cluster.
    Characterize {
        #[arg(long)]
        layers: PathBuf,
        /// clustering.json from `cluster`.
        #[arg(long)]
        clustering: PathBuf,
    },
    /// Full pipeline.
    Run,
    /// Generate a synthetic dataset with planted patterns.
    Synth {
        /// TOML generator spec; the bundled three-pattern spec otherwise.
        #[arg(long)]
        spec: Option<PathBuf>,
    },
    /// Silhouette sweep under each dissimilarity measure.
    CompareMeasures,
}

impl Common {
    fn config(&self) -> Result<RunConfig> {
        let mut config = match (&self.config, &self.data) {
            (Some(path), _) => RunConfig::load(path).with_context(|| format!("loading {}", path.display()))?,
            (None, Some(dir)) => {
                let seed = self.seed.context("--seed is required without --config")?;
                RunConfig::new(InputPaths::in_dir(dir), seed)
            }
            (None, None) => bail!("either --config or --data is required"),
        };
        if let Some(dir) = &self.data {
            let keep = config.input.clone();
            config.input = InputPaths {
                taxonomy: keep.taxonomy,
                groups: keep.groups,
                ..InputPaths::in_dir(dir)
            };
        }
        if let Some(m) = self.measure {
            config.measure = m;
        }
        if let Some(k) = self.k {
            config.k = k;
        }
        if let Some(s) = self.seed {
            config.seed = s;
        }
        if let Some(a) = self.abstention {
            config.abstention = a;
        }
        if let Some(j) = self.jobs {
            config.jobs = Some(j);
        }
        if let Some(o) = &self.out {
            config.out_dir = o.clone();
        }
        if let Some(t) = self.time_limit {
            config.cc.time_limit = t;
        }
        config.validate()?;
        Ok(config)
    }

    fn out_dir(&self, config: Option<&RunConfig>) -> Result<PathBuf> {
        let dir = match (&self.out, config) {
            (Some(o), _) => o.clone(),
            (None, Some(c)) => c.out_dir.clone(),
            (None, None) => bail!("--out is required"),
        };
        std::fs::create_dir_all(&dir).with_context(|| format!("creating {}", dir.display()))?;
        Ok(dir)
    }

    fn limits(&self) -> SolveLimits {
        let mut l = SolveLimits::default();
        if let Some(t) = self.time_limit {
            l.time = Some(std::time::Duration::from_secs_f64(t));
        }
        l
    }
}

fn write_json<T: serde::Serialize>(value: &T, path: &Path) -> Result<()> {
    let text = serde_json::to_string_pretty(value)? + "\n";
    std::fs::write(path, text).with_context(|| format!("writing {}", path.display()))
}

fn patterns_of(layers: &[LayerResult]) -> Vec<Pattern> {
    layers.iter().map(LayerResult::pattern).collect()
}

fn print_sweep(sweep: &SweepReport) {
    println!("k\tsilhouette");
    for e in &sweep.entries {
        println!("{}\t{:.4}", e.k, e.silhouette);
    }
}

fn main() -> Result<()> {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let common = &cli.common;
    if let Some(j) = common.jobs {
        if j == 0 {
            bail!("--jobs must be at least 1");
        }
    }

    match &cli.command {
        Command::Extract => {
            let config = common.config()?;
            let out = common.out_dir(Some(&config))?;
            let (matrix, _) = load_matrix(&config)?;
            let mux = extract_multiplex(&matrix, config.abstention)?;
            mux.write_json(&out.join("multiplex.json"))?;
            let degenerate = mux.degenerate_layers();
            println!(
                "{} layers over {} voters ({} degenerate)",
                mux.layers.len(),
                mux.voters.len(),
                degenerate.len()
            );
        }
        Command::SolveLayers { multiplex } => {
            let (mux, limits, out, jobs) = match multiplex {
                Some(path) => {
                    let mux = MultiplexGraph::read_json(path).with_context(|| format!("reading {}", path.display()))?;
                    let config = common.config().ok();
                    let limits = config.as_ref().map_or_else(|| common.limits(), |c| c.cc.limits());
                    (
                        mux,
                        limits,
                        common.out_dir(config.as_ref())?,
                        config.and_then(|c| c.jobs).or(common.jobs),
                    )
                }
                None => {
                    let config = common.config()?;
                    let (matrix, _) = load_matrix(&config)?;
                    let mux = extract_multiplex(&matrix, config.abstention)?;
                    (mux, config.cc.limits(), common.out_dir(Some(&config))?, config.jobs)
                }
            };
            let (layers, degenerate) = with_jobs(jobs, || solve_layers(&mux, limits))??;
            write_layers_json(&layers, &out.join("layers.json"))?;
            let unproven = layers.iter().filter(|l| !l.optimal).count();
            println!(
                "{} layers solved ({unproven} not proven optimal), {} degenerate skipped",
                layers.len(),
                degenerate.len()
            );
        }
        Command::Distances { layers } => {
            let config = common.config().ok();
            let measure = common
                .measure
                .or(config.as_ref().map(|c| c.measure))
                .unwrap_or_default();
            let out = common.out_dir(config.as_ref())?;
            let patterns = patterns_of(&read_layers_json(layers)?);
            let (d, warnings) = dissimilarity_matrix(&patterns, measure)?;
            d.write_csv(&out.join("distances.csv"))?;
            if !warnings.is_empty() {
                write_json(&warnings, &out.join("distance_warnings.json"))?;
            }
            println!(
                "{} x {} {measure} distances, {} undefined pairs",
                d.len(),
                d.len(),
                warnings.len()
            );
        }
        Command::Cluster { distances } => {
            let config = common.config()?;
            let out = common.out_dir(Some(&config))?;
            let d = DissimilarityMatrix::read_csv(distances)?;
            let mut warnings = Vec::new();
            let stage = with_jobs(config.jobs, || cluster_patterns(&d, &config, &mut warnings))??;
            if let Some(s) = &stage.sweep {
                s.write_sweep_csv(&out.join("sweep.csv"))?;
                s.write_alluvial_csv(&out.join("alluvial.csv"))?;
                print_sweep(s);
            }
            write_cluster_stage(&stage, &out.join("clustering.json"))?;
            for w in &warnings {
                log::warn!("{w}");
            }
            println!("chosen k = {}, sizes {:?}", stage.chosen_k, stage.clustering.sizes());
        }
        Command::Characterize { layers, clustering } => {
            let config = common.config()?;
            let out = common.out_dir(Some(&config))?;
            let (matrix, _) = load_matrix(&config)?;
            let patterns = patterns_of(&read_layers_json(layers)?);
            let stage = read_cluster_stage(clustering)?;
            let results = with_jobs(config.jobs, || characterize(&patterns, &stage, &matrix, &config))??;
            let (clusters, consensus): (Vec<_>, Vec<_>) = results.into_iter().unzip();
            write_cluster_files(&clusters, &consensus, &out)?;
            for c in &clusters {
                println!(
                    "cluster {}: {} roll-calls, {} factions, cost {:.4}{}",
                    c.cluster,
                    c.size,
                    c.characteristic.partition.n_blocks(),
                    c.characteristic.cost,
                    if c.characteristic.optimal {
                        ""
                    } else {
                        " (not proven optimal)"
                    }
                );
            }
        }
        Command::Run => {
            let config = common.config()?;
            let out_dir = common.out_dir(Some(&config))?;
            let output = run_pipeline(&config)?;
            write_outputs(&output, &out_dir)?;
            let r = &output.report;
            if let Some(s) = &r.sweep {
                print_sweep(s);
            }
            println!("chosen k = {}", r.chosen_k);
            for c in &r.clusters {
                println!(
                    "cluster {}: {}/{} roll-calls ({:.0}%), {} factions",
                    c.cluster,
                    c.size,
                    r.layers.len(),
                    100.0 * c.proportion,
                    c.characteristic.partition.n_blocks()
                );
            }
            for w in &r.warnings {
                log::warn!("{w}");
            }
            println!("outputs written to {}", out_dir.display());
        }
        Command::Synth { spec } => {
            let mut s = match spec {
                Some(path) => SyntheticSpec::load(path)?,
                None => SyntheticSpec::three_patterns(common.seed.context("--seed is required without --spec")?),
            };
            if let Some(seed) = common.seed {
                s.seed = seed;
            }
            let out = common.out_dir(None)?;
            let data = generate_synthetic(&s)?;
            data.write(&out)?;
            println!(
                "{} voters x {} roll-calls, {} planted patterns written to {}",
                s.n_voters,
                s.n_rollcalls,
                s.patterns.len(),
                out.display()
            );
        }
        Command::CompareMeasures => {
            let config = common.config()?;
            let out = common.out_dir(Some(&config))?;
            let table = compare_measures(&config)?;
            write_json(&table, &out.join("measures.json"))?;
            println!("measure\tbest_k\tbest_silhouette");
            for row in &table {
                println!("{}\t{}\t{:.4}", row.measure, row.best_k, row.best_silhouette);
            }
        }
    }
    Ok(())
}
