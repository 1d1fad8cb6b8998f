//! Pipeline driver for probing pretrained word embeddings against human
//! semantic-norm datasets.
//!
//! Exit codes: 0 success, 1 runtime failure, 2 configuration error.

mod commands;
mod config;
mod pipeline;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use config::RunConfig;

#[derive(Debug)]
pub enum CliError {
    Config(String),
    Runtime(String),
}

impl CliError {
    fn runtime(e: impl std::fmt::Display) -> Self {
        CliError::Runtime(e.to_string())
    }
}

impl From<normprobe::Error> for CliError {
    fn from(e: normprobe::Error) -> Self {
        match e {
            normprobe::Error::Config(msg) => CliError::Config(msg),
            other => CliError::Runtime(other.to_string()),
        }
    }
}

#[derive(Parser)]
#[command(
    name = "normprobe",
    version,
    about = "Probe pretrained word embeddings against human semantic-norm datasets"
)]
struct Cli {
    /// key=value config file; flags override its entries
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Default)]
struct InputFlags {
    /// Embedding vector file
    #[arg(long)]
    embedding: Option<PathBuf>,
    /// Embedding file format: plain-text | header-text
    #[arg(long)]
    embedding_format: Option<String>,
    /// Additional embedding files whose vocabulary constrains alignment
    #[arg(long, value_delimiter = ',')]
    align_with: Vec<PathBuf>,
    /// Format of the --align-with files
    #[arg(long)]
    align_with_format: Option<String>,
    /// Norm dataset CSV
    #[arg(long)]
    norms: Option<PathBuf>,
    /// Newline-delimited concept exclusion list
    #[arg(long)]
    exclusions: Option<PathBuf>,
    /// key=value file mapping native category labels to canonical ones
    #[arg(long)]
    category_map: Option<PathBuf>,
    /// Column names in the norm CSV
    #[arg(long)]
    concept_column: Option<String>,
    #[arg(long)]
    feature_column: Option<String>,
    #[arg(long)]
    category_column: Option<String>,
    #[arg(long)]
    count_column: Option<String>,
    /// Minimum positive concepts per feature
    #[arg(long)]
    min_concepts: Option<usize>,
    /// Comma-separated regularizer grid
    #[arg(long)]
    lambda_grid: Option<String>,
    /// Disable the unregularized intercept term
    #[arg(long)]
    no_intercept: bool,
    /// F1 mode: in-sample | leave-one-out
    #[arg(long)]
    f1_mode: Option<String>,
    /// Bootstrap resamples
    #[arg(long)]
    resamples: Option<usize>,
    /// Bootstrap confidence level
    #[arg(long)]
    level: Option<f64>,
    /// Seed for all randomized statistics
    #[arg(long)]
    seed: Option<u64>,
    /// Comma-separated perceptual category labels
    #[arg(long)]
    perceptual: Option<String>,
    /// Comma-separated non-perceptual category labels
    #[arg(long)]
    non_perceptual: Option<String>,
    /// Reuse per-feature scores from a previous run's features.csv
    #[arg(long)]
    features: Option<PathBuf>,
    /// Output directory
    #[arg(long)]
    out: Option<PathBuf>,
    /// Probe cache directory (default .normprobe-cache)
    #[arg(long)]
    cache_dir: Option<PathBuf>,
    /// Bypass the probe cache
    #[arg(long)]
    no_cache: bool,
}

#[derive(Subcommand)]
enum Command {
    /// Train per-feature probes and summarize feature fit by category
    Featfit(InputFlags),
    /// Compare the per-feature scores of two runs
    Compare {
        /// features.csv from the first run
        #[arg(long)]
        a: PathBuf,
        /// features.csv from the second run
        #[arg(long)]
        b: PathBuf,
        #[command(flatten)]
        flags: InputFlags,
    },
    /// Concept-level similarity-structure comparison and statistics
    Conceptview {
        #[command(flatten)]
        flags: InputFlags,
        /// WordNet database directory (index.noun, data.noun)
        #[arg(long)]
        wordnet: Option<PathBuf>,
        /// Synset information-content table
        #[arg(long)]
        ic: Option<PathBuf>,
        /// Word frequency table
        #[arg(long)]
        frequency: Option<PathBuf>,
        /// Fixed LSA dimension (default: smallest k holding 90% mass, max 300)
        #[arg(long)]
        lsa_k: Option<usize>,
        /// Squared singular mass to retain when choosing k automatically
        #[arg(long)]
        lsa_mass: Option<f64>,
        /// Cap on the automatic LSA dimension
        #[arg(long)]
        lsa_cap: Option<usize>,
        /// Also write the three pairwise similarity matrices as CSV
        #[arg(long)]
        emit_matrices: bool,
    },
    /// Cluster concepts into semantic domains
    Domains {
        #[command(flatten)]
        flags: InputFlags,
        /// Weight on the squared feature-fit gap in the hybrid distance
        #[arg(long)]
        alpha: Option<f64>,
        /// Run once per alpha in this comma-separated list
        #[arg(long)]
        alpha_sweep: Option<String>,
        /// Number of domains to cut the dendrogram into
        #[arg(long)]
        clusters: Option<usize>,
        #[arg(long)]
        lsa_k: Option<usize>,
        #[arg(long)]
        lsa_mass: Option<f64>,
        #[arg(long)]
        lsa_cap: Option<usize>,
    },
    /// Run the built-in oracle battery
    Selftest,
}

fn merge_inputs(config: &mut RunConfig, flags: &InputFlags) -> Result<(), CliError> {
    if let Some(v) = &flags.embedding {
        config.embedding = Some(v.clone());
    }
    if let Some(v) = &flags.embedding_format {
        config.embedding_format = normprobe::ingest::EmbeddingFormat::parse_name(v)
            .map_err(|e| CliError::Config(e.to_string()))?;
    }
    if !flags.align_with.is_empty() {
        config.align_with = flags.align_with.clone();
    }
    if let Some(v) = &flags.align_with_format {
        config.align_with_format = normprobe::ingest::EmbeddingFormat::parse_name(v)
            .map_err(|e| CliError::Config(e.to_string()))?;
    }
    if let Some(v) = &flags.norms {
        config.norms = Some(v.clone());
    }
    if let Some(v) = &flags.exclusions {
        config.exclusions = Some(v.clone());
    }
    if let Some(v) = &flags.category_map {
        config.category_map = Some(v.clone());
    }
    if let Some(v) = &flags.concept_column {
        config.concept_column = v.clone();
    }
    if let Some(v) = &flags.feature_column {
        config.feature_column = v.clone();
    }
    if let Some(v) = &flags.category_column {
        config.category_column = v.clone();
    }
    if let Some(v) = &flags.count_column {
        config.count_column = v.clone();
    }
    if let Some(v) = flags.min_concepts {
        config.min_concepts = v;
    }
    if let Some(v) = &flags.lambda_grid {
        config.lambda_grid = v
            .split(',')
            .map(|t| {
                t.trim()
                    .parse::<f64>()
                    .map_err(|_| CliError::Config(format!("bad lambda value {t:?}")))
            })
            .collect::<Result<Vec<f64>, CliError>>()?;
    }
    if flags.no_intercept {
        config.intercept = false;
    }
    if let Some(v) = &flags.f1_mode {
        config.f1_mode = config::parse_f1_mode(v)?;
    }
    if let Some(v) = flags.resamples {
        config.resamples = v;
    }
    if let Some(v) = flags.level {
        config.level = v;
    }
    if let Some(v) = flags.seed {
        config.seed = v;
    }
    if let Some(v) = &flags.perceptual {
        config.perceptual = v.split(',').map(|t| t.trim().to_string()).collect();
    }
    if let Some(v) = &flags.non_perceptual {
        config.non_perceptual = v.split(',').map(|t| t.trim().to_string()).collect();
    }
    if let Some(v) = &flags.features {
        config.features = Some(v.clone());
    }
    if let Some(v) = &flags.out {
        config.out = Some(v.clone());
    }
    if let Some(v) = &flags.cache_dir {
        config.cache_dir = Some(v.clone());
    }
    if flags.no_cache {
        config.no_cache = true;
    }
    Ok(())
}

fn run(cli: Cli) -> Result<(), CliError> {
    let mut config = RunConfig::default();
    if let Some(path) = &cli.config {
        config.load_file(path)?;
    }

    match &cli.command {
        Command::Featfit(flags) => {
            merge_inputs(&mut config, flags)?;
            commands::cmd_featfit(&config)
        }
        Command::Compare { a, b, flags } => {
            merge_inputs(&mut config, flags)?;
            commands::cmd_compare(&config, a, b)
        }
        Command::Conceptview {
            flags,
            wordnet,
            ic,
            frequency,
            lsa_k,
            lsa_mass,
            lsa_cap,
            emit_matrices,
        } => {
            merge_inputs(&mut config, flags)?;
            if let Some(v) = wordnet {
                config.wordnet = Some(v.clone());
            }
            if let Some(v) = ic {
                config.ic = Some(v.clone());
            }
            if let Some(v) = frequency {
                config.frequency = Some(v.clone());
            }
            if let Some(v) = lsa_k {
                config.lsa_k = Some(*v);
            }
            if let Some(v) = lsa_mass {
                config.lsa_mass = *v;
            }
            if let Some(v) = lsa_cap {
                config.lsa_cap = *v;
            }
            if *emit_matrices {
                config.emit_matrices = true;
            }
            commands::cmd_conceptview(&config)
        }
        Command::Domains {
            flags,
            alpha,
            alpha_sweep,
            clusters,
            lsa_k,
            lsa_mass,
            lsa_cap,
        } => {
            merge_inputs(&mut config, flags)?;
            if let Some(v) = alpha {
                config.alpha = *v;
            }
            if let Some(v) = alpha_sweep {
                config.alpha_sweep = v
                    .split(',')
                    .map(|t| {
                        t.trim()
                            .parse::<f64>()
                            .map_err(|_| CliError::Config(format!("bad alpha value {t:?}")))
                    })
                    .collect::<Result<Vec<f64>, CliError>>()?;
            }
            if let Some(v) = clusters {
                config.clusters = *v;
            }
            if let Some(v) = lsa_k {
                config.lsa_k = Some(*v);
            }
            if let Some(v) = lsa_mass {
                config.lsa_mass = *v;
            }
            if let Some(v) = lsa_cap {
                config.lsa_cap = *v;
            }
            commands::cmd_domains(&config)
        }
        Command::Selftest => commands::cmd_selftest(),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(CliError::Runtime(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
        Err(CliError::Config(msg)) => {
            eprintln!("config error: {msg}");
            ExitCode::from(2)
        }
    }
}
