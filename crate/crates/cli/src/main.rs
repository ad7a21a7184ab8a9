//! `psq`: align, prune, index, search, evaluate and sweep from the shell.

mod commands;
mod manifest;

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use psq::pruning::{PruningConfig, TopK};

#[derive(Parser, Debug)]
#[command(
    name = "psq",
    version,
    about = "Indexing-time PSQ cross-language retrieval"
)]
struct Cli {
    /// Log verbosity (error, warn, info, debug, trace); RUST_LOG overrides.
    #[arg(long, global = true, default_value = "info")]
    log_level: String,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Estimate a translation table from parallel text.
    Align(AlignArgs),
    /// Prune a translation table.
    Prune(PruneArgs),
    /// Build a PSQ index over a document collection.
    Index(IndexArgs),
    /// Rank documents for a query file and write a TREC run.
    Search(SearchArgs),
    /// Score a TREC run against qrels.
    Eval(EvalArgs),
    /// Build and evaluate one index per pruning grid cell.
    Sweep(SweepArgs),
    /// Write a synthetic bilingual test collection.
    Synth(SynthArgs),
}

#[derive(Args, Debug, Clone)]
pub struct TextArgs {
    /// Keep letter case.
    #[arg(long)]
    no_lowercase: bool,
    /// Keep combining diacritical marks.
    #[arg(long)]
    keep_diacritics: bool,
    /// Keep punctuation characters.
    #[arg(long)]
    keep_punctuation: bool,
    /// Document-language stopword list, one word per line.
    #[arg(long)]
    doc_stopwords: Option<PathBuf>,
    /// Query-language stopword list, one word per line.
    #[arg(long)]
    query_stopwords: Option<PathBuf>,
    /// Document language label recorded in the index.
    #[arg(long, default_value = "")]
    doc_lang: String,
    /// Query language label recorded in the index.
    #[arg(long, default_value = "")]
    query_lang: String,
}

#[derive(Args, Debug, Clone)]
pub struct PruneFlags {
    /// Drop translations with probability below this value.
    #[arg(long, default_value_t = 0.0)]
    pmf_min: f64,
    /// Keep the shortest prefix whose cumulative probability reaches this value.
    #[arg(long, default_value_t = 1.0)]
    cdf_max: f64,
    /// Keep at most this many translations per source token (integer or "inf").
    #[arg(long, default_value = "inf")]
    top_k: TopK,
    /// Rescale kept translations to sum to one.
    #[arg(long)]
    renormalize: bool,
}

impl PruneFlags {
    fn config(&self) -> psq::Result<PruningConfig> {
        PruningConfig::new(self.pmf_min, self.cdf_max, self.top_k, self.renormalize)
    }
}

#[derive(Args, Debug)]
pub struct AlignArgs {
    /// Source-language (document-language) sentences, one per line.
    #[arg(long, requires = "target", conflicts_with = "parallel")]
    source: Option<PathBuf>,
    /// Target-language (query-language) sentences, line-aligned with --source.
    #[arg(long, requires = "source")]
    target: Option<PathBuf>,
    /// Single file of `source<TAB>target` lines.
    #[arg(long, required_unless_present = "source")]
    parallel: Option<PathBuf>,
    /// Pharaoh `i-j` link files line-aligned with --source/--target. Counts
    /// from all files are pooled and normalized instead of running Model 1;
    /// sentences are split on whitespace only.
    #[arg(long, requires = "source")]
    alignments: Vec<PathBuf>,
    /// Model 1 EM iterations.
    #[arg(long, default_value_t = psq::alignment::DEFAULT_ITERATIONS)]
    iterations: usize,
    /// Output table (TSV).
    #[arg(long)]
    out: PathBuf,
    /// Train on one thread.
    #[arg(long)]
    sequential: bool,
    #[command(flatten)]
    text: TextArgs,
}

#[derive(Args, Debug)]
pub struct PruneArgs {
    /// Input table (TSV).
    #[arg(long)]
    table: PathBuf,
    /// Output table (TSV).
    #[arg(long)]
    out: PathBuf,
    #[command(flatten)]
    pruning: PruneFlags,
}

#[derive(Args, Debug)]
pub struct IndexArgs {
    /// Documents as JSON lines with `id` and `text`.
    #[arg(long)]
    docs: PathBuf,
    /// Translation table (TSV), P(query token | document token).
    #[arg(long)]
    table: PathBuf,
    /// Query-language text for the background unigram model.
    #[arg(long)]
    lm_corpus: PathBuf,
    /// Smoothing weight on the background model.
    #[arg(long, default_value_t = psq::indexer::DEFAULT_ALPHA)]
    alpha: f64,
    /// Background probability for tokens unseen in --lm-corpus.
    #[arg(long, default_value_t = psq::indexer::DEFAULT_LM_FLOOR)]
    lm_floor: f64,
    /// Minimum translation probability applied before any other pruning.
    #[arg(long, default_value_t = psq::pruning::DEFAULT_TABLE_FLOOR)]
    table_floor: f64,
    /// Documents per build chunk.
    #[arg(long, default_value_t = psq::indexer::DEFAULT_CHUNK_SIZE)]
    chunk_size: usize,
    /// Build on one thread.
    #[arg(long)]
    sequential: bool,
    /// Output directory for index.psq and manifest.json.
    #[arg(long)]
    out_dir: PathBuf,
    #[command(flatten)]
    pruning: PruneFlags,
    #[command(flatten)]
    text: TextArgs,
}

#[derive(Args, Debug)]
pub struct SearchArgs {
    /// Index directory (or index file).
    #[arg(long)]
    index: PathBuf,
    /// Queries as `query_id<TAB>query text` lines.
    #[arg(long)]
    queries: PathBuf,
    /// Results per query.
    #[arg(long, default_value_t = psq::search::DEFAULT_DEPTH)]
    depth: usize,
    /// Output TREC run file.
    #[arg(long)]
    out: PathBuf,
    /// Run tag written in the last column.
    #[arg(long, default_value = "psq")]
    run_tag: String,
}

#[derive(ValueEnum, Debug, Clone, Copy)]
pub enum ReportFormat {
    Json,
    Table,
}

#[derive(Args, Debug)]
pub struct EvalArgs {
    /// TREC run file.
    #[arg(long)]
    run: PathBuf,
    /// TREC qrels file.
    #[arg(long)]
    qrels: PathBuf,
    /// Rank cutoff for recall.
    #[arg(long, default_value_t = psq::evaluation::DEFAULT_RECALL_CUTOFF)]
    recall_cutoff: usize,
    #[arg(long, value_enum, default_value_t = ReportFormat::Json)]
    format: ReportFormat,
}

#[derive(ValueEnum, Debug, Clone, Copy)]
pub enum MetricArg {
    Map,
    RAt100,
}

#[derive(ValueEnum, Debug, Clone, Copy)]
pub enum SizeArg {
    Bytes,
    Postings,
}

#[derive(Args, Debug)]
pub struct SweepArgs {
    /// Grid JSON (`pmf`, `topk`, `cdf`, `alpha`); defaults to the 480-cell grid.
    #[arg(long)]
    grid: Option<PathBuf>,
    #[arg(long)]
    docs: PathBuf,
    #[arg(long)]
    table: PathBuf,
    #[arg(long)]
    lm_corpus: PathBuf,
    #[arg(long)]
    queries: PathBuf,
    #[arg(long)]
    qrels: PathBuf,
    #[arg(long, default_value_t = psq::indexer::DEFAULT_LM_FLOOR)]
    lm_floor: f64,
    #[arg(long, default_value_t = psq::pruning::DEFAULT_TABLE_FLOOR)]
    table_floor: f64,
    #[arg(long, default_value_t = psq::search::DEFAULT_DEPTH)]
    depth: usize,
    /// Worker threads (default: all cores).
    #[arg(long)]
    workers: Option<usize>,
    /// Run every cell on one thread.
    #[arg(long)]
    sequential: bool,
    /// Effectiveness axis of the frontier.
    #[arg(long, value_enum, default_value_t = MetricArg::RAt100)]
    metric: MetricArg,
    /// Size axis of the frontier.
    #[arg(long, value_enum, default_value_t = SizeArg::Bytes)]
    size: SizeArg,
    #[arg(long)]
    out_dir: PathBuf,
    #[command(flatten)]
    text: TextArgs,
}

#[derive(Args, Debug)]
pub struct SynthArgs {
    #[arg(long)]
    out_dir: PathBuf,
    #[arg(long, default_value_t = 1000)]
    docs: usize,
    #[arg(long, default_value_t = 40)]
    topics: usize,
    #[arg(long, default_value_t = 6000)]
    parallel_pairs: usize,
    #[arg(long, default_value_t = 17)]
    seed: u64,
}

fn main() {
    let cli = Cli::parse();
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(&cli.log_level))
        .format_timestamp(None)
        .init();
    let result = match cli.command {
        Command::Align(a) => commands::align(a),
        Command::Prune(a) => commands::prune(a),
        Command::Index(a) => commands::index(a),
        Command::Search(a) => commands::search(a),
        Command::Eval(a) => commands::eval(a),
        Command::Sweep(a) => commands::sweep(a),
        Command::Synth(a) => commands::synth(a),
    };
    if let Err(e) = result {
        eprintln!("error: {e:#}");
        std::process::exit(1);
    }
}
