//! Command-line interface.

use std::collections::BTreeSet;
use std::ffi::OsString;
use std::path::PathBuf;

use authlab_core::similarity::{FeatureScaling, SimilarityKind};
use authlab_core::synth::generate_corpus;
use clap::{Args, Parser, Subcommand};

use crate::config::{Fractions, PipelineConfig};
use crate::failure::{Failure, EXIT_OK};
use crate::io::{self, write_jsonl, Header};
use crate::pipeline::{Pipeline, TopicSelection};

#[derive(Debug, Parser)]
#[command(name = "authlab", version, about = "Account and topic authenticity scoring")]
pub struct Cli {
    /// TOML configuration file; flags override its values.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Master seed for topic fitting, splits, clustering and synthesis.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Worker threads. Results do not depend on this.
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    /// Directory for artifacts and caches.
    #[arg(long, global = true, default_value = "out")]
    pub out_dir: PathBuf,
    /// error, warn, info, debug or trace.
    #[arg(long, global = true, default_value = "info")]
    pub log_level: log::LevelFilter,
    #[command(subcommand)]
    pub command: Command,
}

/// Input corpus and text-processing flags shared by the data stages.
#[derive(Debug, Clone, Args)]
pub struct DataArgs {
    #[arg(long)]
    pub accounts: Option<PathBuf>,
    #[arg(long)]
    pub posts: Option<PathBuf>,
    /// Drop accounts with fewer posts.
    #[arg(long)]
    pub min_posts: Option<usize>,
    /// `english`, `none`, or a file with one stop word per line.
    #[arg(long)]
    pub stopwords: Option<String>,
    /// Stemmer: `en` or `none`.
    #[arg(long)]
    pub stem: Option<String>,
    /// Compare profile and behavior vectors without min-max scaling.
    #[arg(long)]
    pub raw_features: bool,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Load and validate the corpus and write a summary.
    Ingest {
        #[command(flatten)]
        data: DataArgs,
    },
    /// Generate a labeled synthetic corpus into the output directory.
    Synth,
    /// Fit the topic model and infer per-post topic distributions.
    FitTopics {
        #[command(flatten)]
        data: DataArgs,
        /// Number of topics.
        #[arg(long)]
        k: Option<usize>,
        #[arg(long)]
        iters: Option<usize>,
        #[arg(long)]
        alpha: Option<f64>,
        #[arg(long)]
        beta: Option<f64>,
        #[arg(long)]
        min_term_freq: Option<usize>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Dump profile and behavior feature vectors.
    Features {
        #[command(flatten)]
        data: DataArgs,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Compute and cache a pairwise similarity matrix.
    Similarity {
        #[command(flatten)]
        data: DataArgs,
        #[arg(long)]
        kind: Option<SimilarityKind>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Score every account.
    Score {
        #[command(flatten)]
        data: DataArgs,
        /// Neighbors per account.
        #[arg(long)]
        k: Option<usize>,
        #[arg(long)]
        kind: Option<SimilarityKind>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Cluster accounts and sample candidates for manual labeling.
    Candidates {
        #[command(flatten)]
        data: DataArgs,
        #[arg(long)]
        clusters: Option<usize>,
        #[arg(long)]
        per_cluster: Option<usize>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Aggregate account scores into topic authenticity.
    Aggregate {
        #[command(flatten)]
        data: DataArgs,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Render topic reports into the output directory.
    Report {
        #[command(flatten)]
        data: DataArgs,
        /// `all` or a comma-separated list of topic indexes.
        #[arg(long, default_value = "all")]
        topics: String,
        #[arg(long)]
        bins: Option<usize>,
    },
    /// Cross-validated evaluation of the similarity kinds.
    Eval {
        #[command(flatten)]
        data: DataArgs,
        #[arg(long)]
        out: Option<PathBuf>,
        /// `fine`, `coarse`, or a comma-separated list.
        #[arg(long)]
        fractions: Option<Fractions>,
        #[arg(long)]
        repeats: Option<usize>,
        #[arg(long, value_delimiter = ',')]
        ks: Option<Vec<usize>>,
        #[arg(long, value_delimiter = ',')]
        kinds: Option<Vec<SimilarityKind>>,
    },
    /// Ingest, fit topics, compute features and similarity, score,
    /// aggregate and report, reusing cached stages.
    Run {
        #[command(flatten)]
        data: DataArgs,
    },
}

fn apply_data(cfg: &mut PipelineConfig, d: &DataArgs) {
    if let Some(p) = &d.accounts {
        cfg.input.accounts = p.clone();
    }
    if let Some(p) = &d.posts {
        cfg.input.posts = p.clone();
    }
    if let Some(n) = d.min_posts {
        cfg.input.min_posts = n;
    }
    if let Some(s) = &d.stopwords {
        cfg.text.stopwords = s.clone();
    }
    if let Some(s) = &d.stem {
        cfg.text.stemmer = s.clone();
    }
    if d.raw_features {
        cfg.similarity.scaling = FeatureScaling::Raw;
    }
}

fn set<T>(slot: &mut T, v: Option<T>) {
    if let Some(v) = v {
        *slot = v;
    }
}

fn parse_selection(s: &str) -> Result<TopicSelection, Failure> {
    if s == "all" {
        return Ok(TopicSelection::All);
    }
    s.split(',')
        .map(|t| {
            t.trim()
                .parse::<usize>()
                .map_err(|e| Failure::config(format!("bad topic index `{t}`: {e}")))
        })
        .collect::<Result<BTreeSet<_>, _>>()
        .map(TopicSelection::Only)
}

/// Apply the flags of `command` to the configuration and run it.
fn execute(cli: Cli) -> Result<(), Failure> {
    let mut cfg = match &cli.config {
        Some(path) => PipelineConfig::load(path)?,
        None => PipelineConfig::default(),
    };
    if let Some(seed) = cli.seed {
        cfg.seed = seed;
        cfg.synth.seed = seed;
    }
    let out_dir = cli.out_dir;
    let mut paths = crate::pipeline::OutputPaths::default();
    let mut selection = TopicSelection::All;
    let name = match &cli.command {
        Command::Ingest { .. } => "ingest",
        Command::Synth => "synth",
        Command::FitTopics { .. } => "fit-topics",
        Command::Features { .. } => "features",
        Command::Similarity { .. } => "similarity",
        Command::Score { .. } => "score",
        Command::Candidates { .. } => "candidates",
        Command::Aggregate { .. } => "aggregate",
        Command::Report { .. } => "report",
        Command::Eval { .. } => "eval",
        Command::Run { .. } => "run",
    };
    match cli.command {
        Command::Synth => return synth(&cfg, &out_dir),
        Command::Ingest { data } | Command::Run { data } => apply_data(&mut cfg, &data),
        Command::FitTopics {
            data,
            k,
            iters,
            alpha,
            beta,
            min_term_freq,
            out,
        } => {
            apply_data(&mut cfg, &data);
            set(&mut cfg.topics.k, k);
            set(&mut cfg.topics.iterations, iters);
            set(&mut cfg.topics.alpha, alpha);
            set(&mut cfg.topics.beta, beta);
            set(&mut cfg.topics.min_term_freq, min_term_freq);
            paths.model = out;
        }
        Command::Features { data, out } => {
            apply_data(&mut cfg, &data);
            paths.features = out;
        }
        Command::Similarity { data, kind, out } => {
            apply_data(&mut cfg, &data);
            set(&mut cfg.similarity.kind, kind);
            paths.similarity = out;
        }
        Command::Score { data, k, kind, out } => {
            apply_data(&mut cfg, &data);
            set(&mut cfg.classify.k, k);
            set(&mut cfg.similarity.kind, kind);
            paths.scores = out;
        }
        Command::Candidates {
            data,
            clusters,
            per_cluster,
            out,
        } => {
            apply_data(&mut cfg, &data);
            set(&mut cfg.candidates.clusters, clusters);
            set(&mut cfg.candidates.per_cluster, per_cluster);
            paths.candidates = out;
        }
        Command::Aggregate { data, out } => {
            apply_data(&mut cfg, &data);
            paths.topics = out;
        }
        Command::Report { data, topics, bins } => {
            apply_data(&mut cfg, &data);
            set(&mut cfg.report.bins, bins);
            selection = parse_selection(&topics)?;
            paths.reports = Some(out_dir.clone());
        }
        Command::Eval {
            data,
            out,
            fractions,
            repeats,
            ks,
            kinds,
        } => {
            apply_data(&mut cfg, &data);
            set(&mut cfg.eval.fractions, fractions);
            set(&mut cfg.eval.repeats, repeats);
            set(&mut cfg.eval.ks, ks);
            set(&mut cfg.eval.kinds, kinds);
            paths.results = out;
        }
    }
    // Surface bad settings as configuration errors before touching data.
    cfg.text.resolve()?;
    let mut p = Pipeline::new(cfg, &out_dir);
    p.paths = paths;
    let result = match name {
        "ingest" => p.ingest(),
        "fit-topics" => p.fit_topics(),
        "features" => p.features(),
        "similarity" => p.similarity(p.cfg.similarity.kind).map(|_| ()),
        "score" => p.score().map(|_| ()),
        "candidates" => p.candidates(),
        "aggregate" => p.aggregate(),
        "report" => p.report(&selection),
        "eval" => p.eval().map(|_| ()),
        "run" => {
            let r = p.run_all();
            let manifest = p.write_manifest("run");
            r.and(manifest.map(|_| ()))
        }
        _ => unreachable!("every command is dispatched"),
    };
    result
}

fn synth(cfg: &PipelineConfig, out_dir: &std::path::Path) -> Result<(), Failure> {
    let corpus = generate_corpus(&cfg.synth)?;
    let config = cfg.to_json();
    let hash = cfg.hash();
    io::write_dataset(out_dir, &corpus.dataset, &Header::new("synth", &hash, &config))?;
    write_jsonl(&out_dir.join("truth.jsonl"), &Header::new("truth", &hash, &config), &corpus.truth)?;
    log::info!(
        "wrote {} accounts and {} posts to {}",
        corpus.dataset.accounts().len(),
        corpus.dataset.posts().len(),
        out_dir.display()
    );
    Ok(())
}

/// Parse `args`, run the command and return the process exit code.
pub fn main<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            // Usage errors are configuration errors (2); help and version
            // exit 0.
            return e.exit_code();
        }
    };
    let _ = env_logger::Builder::new()
        .filter_level(cli.log_level)
        .format_timestamp(None)
        .target(env_logger::Target::Stderr)
        .try_init();
    let mut pool = rayon::ThreadPoolBuilder::new();
    if let Some(n) = cli.threads {
        if n == 0 {
            eprintln!("error: configuration error: --threads must be at least 1");
            return crate::failure::EXIT_CONFIG;
        }
        pool = pool.num_threads(n);
    }
    let pool = match pool.build() {
        Ok(p) => p,
        Err(e) => {
            eprintln!("error: stage failure: cannot start worker threads: {e}");
            return crate::failure::EXIT_STAGE;
        }
    };
    match pool.install(|| execute(cli)) {
        Ok(()) => EXIT_OK,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
