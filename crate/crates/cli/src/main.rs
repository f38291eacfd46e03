mod commands;
mod config;

use std::path::PathBuf;
use std::process::ExitCode;

use cirlab_core::evaluation::ReportFormat;
use clap::{Parser, Subcommand, ValueEnum};

use crate::commands::Ctx;
use crate::config::{Overrides, RunConfig};

const FORMATS: &str = "\
Files (all written atomically into the output directory):
  corpus.jsonl          one JSON object per line, tagged by \"record\":
                        {\"record\":\"document\",...} lines, then one
                        {\"record\":\"queries\",\"count\":N} line, then N
                        {\"record\":\"query\",...} lines
  chunks.jsonl          one chunk per line: chunk_id, doc_id, section_index,
                        heading_path, tokens. chunk_id = <doc>#s<NNN>#o<NNNNN>
  enriched_<s>.jsonl    one enriched chunk per line: chunk_id, strategy, cir,
                        tokens (context tokens first)
  vectors_<s>.cirx      binary, little-endian: b\"CIRX\", u16 version=1,
  index_<s>.cirx        u32 dim, u64 count; per entry u32-length-prefixed
                        chunk_id and doc_id plus u32 section; then count*dim f32
  sweep.csv             header strategy,mean_cir,ndcg10,recall5_specific,
                        recall5_thematic,homogenization,wrong_section_share;
                        rows ascending by mean_cir, 6 decimals
  sweep.jsonl           the same rows as JSON, then one {\"record\":\"flags\"} line
  plot_<s>.dat          two whitespace-separated columns: metric value
  <command>.config.toml the fully resolved configuration of the run

Config file (--config): TOML key = value pairs using the option names below
with underscores (seed, docs, dim, hash_seed, target, strategy, t_max, k,
with_ddai, out_dir). Flags override the file.

Exit codes: 0 ok, 1 other failure, 2 invalid flags, 3 missing input file,
4 malformed input file, 5 invalid configuration.";

#[derive(Parser, Debug)]
#[command(name = "cirlab", version, about = "Context injection ratio lab: enrich chunks, embed, index and measure vector dilution", after_long_help = FORMATS)]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// TOML file with default values for the options below.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Output directory.
    #[arg(long, global = true, env = "CIRLAB_OUT_DIR")]
    out_dir: Option<PathBuf>,

    /// Corpus seed. [default: 42]
    #[arg(long, global = true)]
    seed: Option<u64>,

    /// Number of documents to generate. [default: 50]
    #[arg(long, global = true)]
    docs: Option<usize>,

    /// Embedding dimension. [default: 256]
    #[arg(long, global = true)]
    dim: Option<usize>,

    /// Feature-hashing seed. [default: 0]
    #[arg(long, global = true)]
    hash_seed: Option<u64>,

    /// Chunk size in tokens, also the reference length of the static
    /// strategies. [default: 250]
    #[arg(long, global = true)]
    target: Option<usize>,

    /// Injection strategy. [default: medium]
    #[arg(long, global = true, value_parser = ["baseline", "low", "medium", "high", "overload", "ddai"])]
    strategy: Option<String>,

    /// Injection ratio ceiling for ddai. [default: 0.35]
    #[arg(long, global = true)]
    t_max: Option<f64>,

    /// Number of hits returned by `query`. [default: 10]
    #[arg(long, global = true)]
    k: Option<usize>,

    /// Add a ddai row to `sweep`.
    #[arg(long, global = true)]
    with_ddai: bool,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Generate the synthetic corpus and its queries.
    Gen,
    /// Split corpus sections into fixed-size chunks.
    Chunk {
        #[arg(long)]
        corpus: Option<PathBuf>,
    },
    /// Prepend context to every chunk with one strategy.
    Inject {
        #[arg(long)]
        corpus: Option<PathBuf>,
        #[arg(long)]
        chunks: Option<PathBuf>,
    },
    /// Embed enriched chunks into a vector dump.
    Embed {
        #[arg(long)]
        input: Option<PathBuf>,
    },
    /// Validate a vector dump and write it as a search index.
    Index {
        #[arg(long)]
        input: Option<PathBuf>,
    },
    /// Print the top-k chunks for a free-text query.
    Query {
        #[arg(long)]
        index: Option<PathBuf>,
        #[arg(long)]
        text: String,
    },
    /// Run every strategy end to end and print the metric table.
    Sweep {
        /// Use this corpus instead of generating one.
        #[arg(long)]
        corpus: Option<PathBuf>,
    },
    /// Render an existing sweep.jsonl in another format.
    Report {
        #[arg(long)]
        input: Option<PathBuf>,
        #[arg(long, value_enum, default_value_t = Format::Csv)]
        format: Format,
    },
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Format {
    Csv,
    Jsonl,
    #[value(name = "plotdata")]
    PlotData,
}

impl From<Format> for ReportFormat {
    fn from(f: Format) -> Self {
        match f {
            Format::Csv => ReportFormat::Csv,
            Format::Jsonl => ReportFormat::Jsonl,
            Format::PlotData => ReportFormat::PlotData,
        }
    }
}

/// Failures detected by the front end itself.
#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("missing input file: {}", .0.display())]
    MissingInput(PathBuf),
    #[error("invalid config file {0}")]
    BadConfig(String),
}

fn exit_code(err: &anyhow::Error) -> u8 {
    use cirlab_core::Error as E;
    for cause in err.chain() {
        if let Some(e) = cause.downcast_ref::<CliError>() {
            return match e {
                CliError::MissingInput(_) => 3,
                CliError::BadConfig(_) => 5,
            };
        }
        if let Some(e) = cause.downcast_ref::<E>() {
            return match e {
                E::Io { source, .. } if source.kind() == std::io::ErrorKind::NotFound => 3,
                E::Parse { .. } | E::Format(_) => 4,
                E::Config { .. } => 5,
                _ => 1,
            };
        }
    }
    1
}

fn run(cli: Cli) -> anyhow::Result<()> {
    let overrides = Overrides {
        seed: cli.seed,
        docs: cli.docs,
        dim: cli.dim,
        hash_seed: cli.hash_seed,
        target: cli.target,
        strategy: cli.strategy,
        t_max: cli.t_max,
        k: cli.k,
        with_ddai: cli.with_ddai,
        out_dir: cli.out_dir,
    };
    let config = RunConfig::resolve(cli.config.as_deref(), overrides)?;
    let command = match &cli.command {
        Command::Gen => "gen",
        Command::Chunk { .. } => "chunk",
        Command::Inject { .. } => "inject",
        Command::Embed { .. } => "embed",
        Command::Index { .. } => "index",
        Command::Query { .. } => "query",
        Command::Sweep { .. } => "sweep",
        Command::Report { .. } => "report",
    };
    let ctx = Ctx { config, command };
    match cli.command {
        Command::Gen => commands::gen(&ctx),
        Command::Chunk { corpus } => commands::chunk(&ctx, corpus.as_deref()),
        Command::Inject { corpus, chunks } => {
            commands::inject(&ctx, corpus.as_deref(), chunks.as_deref())
        }
        Command::Embed { input } => commands::embed(&ctx, input.as_deref()),
        Command::Index { input } => commands::index(&ctx, input.as_deref()),
        Command::Query { index, text } => commands::query(&ctx, index.as_deref(), &text),
        Command::Sweep { corpus } => commands::sweep(&ctx, corpus.as_deref()),
        Command::Report { input, format } => {
            commands::report(&ctx, input.as_deref(), format.into())
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            let msg = format!("{e:#}").replace('\n', " ");
            eprintln!("cirlab: error: {msg}");
            ExitCode::from(exit_code(&e))
        }
    }
}
