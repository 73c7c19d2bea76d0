use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

mod commands;

/// Keyword retrieval over N-best ASR hypotheses.
#[derive(Debug, Parser)]
#[command(name = "jspg", version, about)]
struct Cli {
    /// Directory holding pinyin.tsv and the optional glyph tables.
    #[arg(long, global = true, env = "JSPG_RESOURCES_DIR", default_value = "data")]
    resources: PathBuf,

    /// Worker threads for scoring (defaults to the number of cores).
    #[arg(long, global = true)]
    workers: Option<usize>,

    /// Increase log verbosity (-v info, -vv debug).
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    verbose: u8,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Retrieve the top-K keywords for every utterance of a dataset.
    Retrieve(RetrieveArgs),
    /// Measure Recall@K against gold keywords.
    Eval(EvalArgs),
    /// Show pinyin and glyph similarity of two characters.
    CharSim { a: char, b: char },
    /// Align a keyword against one hypothesis and print the DP matrix.
    Align(AlignArgs),
    /// Load the resource tables and report coverage.
    ValidateResources,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Feature {
    /// Semantic score only.
    Semantic,
    /// Pinyin relatedness only.
    Pinyin,
    /// Glyph relatedness only.
    Glyph,
    /// Pinyin and glyph fused with --alpha.
    Pg,
    /// All three signals.
    Full,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum MissingSemantic {
    /// Fall back to the pinyin/glyph score.
    Renormalize,
    /// Count a missing semantic score as 0.
    Zero,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum AlignKind {
    Pinyin,
    Glyph,
}

#[derive(Debug, Args)]
struct EmbeddingArgs {
    /// Precomputed embeddings (JSONL records of kind/key/embedding).
    #[arg(long, conflicts_with = "embed_url")]
    embeddings: Option<PathBuf>,

    /// Embedding service base URL, queried at startup via POST /embed.
    #[arg(long)]
    embed_url: Option<String>,

    /// Embedding service timeout in seconds.
    #[arg(long, default_value_t = 30)]
    embed_timeout: u64,

    /// Retries per embedding request.
    #[arg(long, default_value_t = 2)]
    embed_retries: u32,
}

#[derive(Debug, Args)]
struct FusionArgs {
    /// Weight of the pinyin score against the glyph score.
    #[arg(long, default_value_t = 0.7)]
    alpha: f64,

    /// Weight of the semantic score against the fused pinyin/glyph score.
    #[arg(long, default_value_t = 0.4)]
    beta: f64,

    /// Signals used for ranking. All but `full` override --alpha/--beta.
    #[arg(long, value_enum, default_value_t = Feature::Full)]
    feature: Feature,

    /// Treatment of keywords or utterances without an embedding.
    #[arg(long, value_enum, default_value_t = MissingSemantic::Renormalize)]
    missing_semantic: MissingSemantic,
}

#[derive(Debug, Args)]
struct RetrieveArgs {
    /// Keyword dictionary, one keyword per line.
    #[arg(long)]
    dict: PathBuf,

    /// Utterances as JSONL (`id`, `hypotheses`).
    #[arg(long)]
    input: PathBuf,

    /// Number of keywords kept per utterance.
    #[arg(long, default_value_t = 10)]
    top_k: usize,

    /// Output JSONL file (stdout when absent).
    #[arg(long, short)]
    output: Option<PathBuf>,

    #[command(flatten)]
    fusion: FusionArgs,

    #[command(flatten)]
    embeddings: EmbeddingArgs,
}

#[derive(Debug, Args)]
struct EvalArgs {
    /// Keyword dictionary, one keyword per line.
    #[arg(long)]
    dict: PathBuf,

    /// Dataset JSONL with `gold_keywords`.
    #[arg(long)]
    dataset: PathBuf,

    /// Comma-separated, strictly ascending cutoffs.
    #[arg(long, value_delimiter = ',', default_value = "1,3,5,10,20,50,100")]
    k_list: Vec<usize>,

    /// Write the recall table as CSV.
    #[arg(long)]
    csv: Option<PathBuf>,

    /// Write per-utterance hits and retrieved keywords as JSONL.
    #[arg(long)]
    report: Option<PathBuf>,

    /// Sweep these alpha values (with --ablation-beta) instead of a single run.
    #[arg(long, value_delimiter = ',', requires = "ablation_beta")]
    ablation_alpha: Vec<f64>,

    #[arg(long, value_delimiter = ',', requires = "ablation_alpha")]
    ablation_beta: Vec<f64>,

    #[command(flatten)]
    fusion: FusionArgs,

    #[command(flatten)]
    embeddings: EmbeddingArgs,
}

#[derive(Debug, Args)]
struct AlignArgs {
    keyword: String,
    hypothesis: String,

    /// Substitution costs from pinyin or glyph similarity.
    #[arg(long, value_enum, default_value_t = AlignKind::Pinyin)]
    kind: AlignKind,

    /// Print the optimal path.
    #[arg(long)]
    trace: bool,
}

/// Error carrying its process exit code.
#[derive(Debug)]
pub enum Failure {
    Usage(anyhow::Error),
    Data(anyhow::Error),
    Internal(anyhow::Error),
}

impl Failure {
    pub fn usage(e: impl Into<anyhow::Error>) -> Self {
        Failure::Usage(e.into())
    }

    pub fn data(e: impl Into<anyhow::Error>) -> Self {
        Failure::Data(e.into())
    }

    fn code(&self) -> u8 {
        match self {
            Failure::Usage(_) => 1,
            Failure::Data(_) => 2,
            Failure::Internal(_) => 3,
        }
    }

    fn error(&self) -> &anyhow::Error {
        match self {
            Failure::Usage(e) | Failure::Data(e) | Failure::Internal(e) => e,
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    let level = match cli.verbose {
        0 => "warn",
        1 => "info",
        _ => "debug",
    };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level))
        .format_timestamp(None)
        .init();

    let outcome = std::panic::catch_unwind(|| run(cli))
        .unwrap_or_else(|_| Err(Failure::Internal(anyhow::anyhow!("internal error (panic)"))));
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.error());
            ExitCode::from(f.code())
        }
    }
}

fn run(cli: Cli) -> Result<(), Failure> {
    if let Some(n) = cli.workers {
        if n == 0 {
            return Err(Failure::usage(anyhow::anyhow!("--workers must be at least 1")));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| Failure::Internal(e.into()))?;
    }
    match cli.command {
        Command::Retrieve(args) => commands::retrieve(&cli.resources, args),
        Command::Eval(args) => commands::eval(&cli.resources, args),
        Command::CharSim { a, b } => commands::char_sim(&cli.resources, a, b),
        Command::Align(args) => commands::align(&cli.resources, args),
        Command::ValidateResources => commands::validate_resources(&cli.resources),
    }
}
