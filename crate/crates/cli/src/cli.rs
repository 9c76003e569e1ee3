use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

use lexfit::{BetaPolicy, EdgeFormat, RetrofitConfig, UpdateMode};

#[derive(Parser)]
#[command(
    name = "lexfit",
    version,
    about = "Retrofit concept vectors to a lexicon graph and evaluate them against similarity benchmarks"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand)]
pub enum Command {
    /// Retrofit vectors against a lexicon graph and write the result
    Retrofit(RetrofitArgs),
    /// Score benchmark pairs and report Spearman correlation with ratings
    Eval(EvalArgs),
    /// Run relation-set ablations and emit a table, baseline row first
    Ablate(AblateArgs),
    /// Summarize a vector store and lexicon graph
    Inspect(InspectArgs),
}

#[derive(Args)]
pub struct SolverOpts {
    /// Anchor weight toward the original vectors
    #[arg(long, default_value_t = 1.0)]
    pub alpha: f64,

    /// Edge weight policy: degree-inverse or constant:<c>
    #[arg(long, default_value = "degree-inverse")]
    pub beta: BetaPolicy,

    /// Convergence threshold on the max per-node displacement per sweep
    #[arg(long, default_value_t = 0.01)]
    pub epsilon: f64,

    #[arg(long, default_value_t = 10)]
    pub max_sweeps: usize,

    /// Update mode: online (in place) or jacobi (sweep-start snapshot)
    #[arg(long, default_value = "online")]
    pub mode: UpdateMode,
}

impl SolverOpts {
    pub fn config(&self) -> RetrofitConfig {
        RetrofitConfig {
            alpha: self.alpha,
            beta_policy: self.beta,
            max_sweeps: self.max_sweeps,
            epsilon: self.epsilon,
            update_mode: self.mode,
        }
    }
}

#[derive(Args)]
pub struct RetrofitArgs {
    /// Vector file in word2vec text format
    #[arg(long)]
    pub vectors: PathBuf,

    /// Relation edge file
    #[arg(long)]
    pub lexicon: PathBuf,

    /// Lexicon file format: tsv or rrf
    #[arg(long, default_value = "tsv")]
    pub lexicon_format: EdgeFormat,

    /// Comma-separated relation labels to keep (e.g. RN,RO)
    #[arg(long)]
    pub relations: String,

    #[command(flatten)]
    pub solver: SolverOpts,

    /// L2-normalize vectors after loading
    #[arg(long)]
    pub normalize: bool,

    /// Output path for the retrofitted vectors
    #[arg(long)]
    pub out: PathBuf,

    /// Print the run summary as JSON on stdout
    #[arg(long)]
    pub json: bool,

    #[arg(long, short)]
    pub verbose: bool,
}

#[derive(Args)]
pub struct EvalArgs {
    /// Vector file in word2vec text format
    #[arg(long)]
    pub vectors: PathBuf,

    /// Benchmark CSV; repeat for several benchmarks
    #[arg(long, required = true)]
    pub benchmark: Vec<PathBuf>,

    /// Column names: Mean,Term1,Term2,CUI1,CUI2[,Category]
    #[arg(long)]
    pub columns: Option<String>,

    /// L2-normalize vectors after loading
    #[arg(long)]
    pub normalize: bool,

    /// Emit reports as JSON instead of text
    #[arg(long)]
    pub json: bool,

    /// List skipped pairs on stderr
    #[arg(long, short)]
    pub verbose: bool,
}

#[derive(Args)]
pub struct AblateArgs {
    /// Vector file in word2vec text format
    #[arg(long)]
    pub vectors: PathBuf,

    /// Relation edge file
    #[arg(long)]
    pub lexicon: PathBuf,

    /// Lexicon file format: tsv or rrf
    #[arg(long, default_value = "tsv")]
    pub lexicon_format: EdgeFormat,

    /// Semicolon-separated relation sets, labels joined with +
    /// (e.g. "RN;RO;RN+RO;CHD+SY+RN+RO+RQ")
    #[arg(long)]
    pub sets: String,

    /// Benchmark CSV; repeat for several benchmarks
    #[arg(long, required = true)]
    pub benchmark: Vec<PathBuf>,

    /// Column names: Mean,Term1,Term2,CUI1,CUI2[,Category]
    #[arg(long)]
    pub columns: Option<String>,

    #[command(flatten)]
    pub solver: SolverOpts,

    /// L2-normalize vectors after loading
    #[arg(long)]
    pub normalize: bool,

    /// Write the TSV table here instead of stdout
    #[arg(long)]
    pub out: Option<PathBuf>,

    /// Emit the table as JSON on stdout
    #[arg(long)]
    pub json: bool,

    #[arg(long, short)]
    pub verbose: bool,
}

#[derive(Args)]
pub struct InspectArgs {
    /// Vector file in word2vec text format
    #[arg(long)]
    pub vectors: PathBuf,

    /// Relation edge file (optional)
    #[arg(long)]
    pub lexicon: Option<PathBuf>,

    /// Lexicon file format: tsv or rrf
    #[arg(long, default_value = "tsv")]
    pub lexicon_format: EdgeFormat,

    /// Comma-separated relation labels to keep; all labels when omitted
    #[arg(long)]
    pub relations: Option<String>,

    /// L2-normalize vectors after loading
    #[arg(long)]
    pub normalize: bool,

    /// Print the cosine for one concept pair
    #[arg(long, num_args = 2, value_names = ["CUI1", "CUI2"])]
    pub pair: Option<Vec<String>>,

    /// Emit the summary as JSON
    #[arg(long)]
    pub json: bool,

    #[arg(long, short)]
    pub verbose: bool,
}
