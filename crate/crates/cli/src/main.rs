//! `lingcomp` — complexity scoring for annotated speech transcripts and
//! analysis of how automatic transcription shifts the scores.

mod commands;
mod config;

use std::path::PathBuf;
use std::process::ExitCode;
use std::sync::OnceLock;

use clap::{Args, Parser, Subcommand};

use lingcomp::measures::{MeasureRegistry, DEFAULT_DEFLATE_LEVEL};
use lingcomp::treebank::RuleSet;

#[derive(Debug)]
pub enum CliError {
    /// Bad inputs, bad flags, domain errors. Exit code 1.
    Validation(String),
    /// Operating-system I/O failures. Exit code 2.
    Io(String),
}

impl From<lingcomp::Error> for CliError {
    fn from(e: lingcomp::Error) -> Self {
        if e.is_io() {
            CliError::Io(e.to_string())
        } else {
            CliError::Validation(e.to_string())
        }
    }
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Validation(_) => 1,
            CliError::Io(_) => 2,
        }
    }

    fn message(&self) -> &str {
        match self {
            CliError::Validation(m) | CliError::Io(m) => m,
        }
    }
}

fn long_version() -> &'static str {
    static VERSION: OnceLock<String> = OnceLock::new();
    VERSION.get_or_init(|| {
        format!(
            "{}\nregistry version: {}\npattern-set version: {}\ndefault deflate level: {}",
            env!("CARGO_PKG_VERSION"),
            MeasureRegistry::default_registry().version(),
            RuleSet::default_rules().version(),
            DEFAULT_DEFLATE_LEVEL,
        )
    })
}

#[derive(Parser)]
#[command(
    name = "lingcomp",
    about = "Complexity contours over speech transcripts, WER analysis, and score agreement",
    version = env!("CARGO_PKG_VERSION"),
    long_version = long_version(),
)]
struct Cli {
    /// Key-value config file; flags override its entries.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Worker threads (default: number of cores).
    #[arg(long, global = true)]
    jobs: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Score a corpus: per-document measure table plus window contours.
    Analyze(AnalyzeArgs),
    /// Align hypothesis transcripts against references and report error rates.
    Wer(WerArgs),
    /// Spearman agreement between two score tables (e.g. manual vs ASR).
    Agree(AgreeArgs),
    /// Remove near-zero-variance and redundant measures from a score table.
    Select(SelectArgs),
    /// Rank measures by ordinal-regression feature importance.
    Rank(RankArgs),
    /// Produce the agreement + ranking bundle in one output directory.
    Report(ReportArgs),
}

#[derive(Args)]
pub struct AnalyzeArgs {
    /// JSON-Lines corpus of annotated documents.
    #[arg(long)]
    corpus: PathBuf,
    /// Resource directory containing manifest.tsv.
    #[arg(long)]
    resources: Option<PathBuf>,
    /// Output directory for scores.csv, contours.csv and metadata.json.
    #[arg(long)]
    out_dir: Option<PathBuf>,
    /// Window size in sentences.
    #[arg(long)]
    ws: Option<usize>,
    /// Window stride in sentences.
    #[arg(long)]
    step: Option<usize>,
    /// Document aggregate: mean or median.
    #[arg(long)]
    aggregate: Option<String>,
    /// Deflate level (0-9) for the compression measure.
    #[arg(long)]
    deflate_level: Option<u32>,
    /// NP modifier normalization: per-np or per-sentence.
    #[arg(long)]
    np_norm: Option<String>,
    /// Custom measure registry manifest.
    #[arg(long)]
    registry: Option<PathBuf>,
    /// Custom syntactic pattern rule file.
    #[arg(long)]
    patterns: Option<PathBuf>,
}

#[derive(Args)]
pub struct WerArgs {
    /// Reference transcripts: `doc_id<TAB>words`.
    #[arg(long = "ref")]
    reference: PathBuf,
    /// Hypothesis transcripts: `doc_id<TAB>words`.
    #[arg(long)]
    hyp: PathBuf,
    /// Report JSON destination.
    #[arg(long)]
    out: PathBuf,
    /// Optional `doc_id<TAB>speaker` map for per-speaker statistics.
    #[arg(long)]
    speakers: Option<PathBuf>,
    /// Custom hesitation lexicon, one word per line.
    #[arg(long)]
    hesitations: Option<PathBuf>,
    /// Drop hesitation markers from both sides before scoring.
    #[arg(long)]
    filter_hesitations: bool,
}

#[derive(Args)]
pub struct AgreeArgs {
    /// Score table from manual transcripts.
    #[arg(long)]
    manual: PathBuf,
    /// Score table from ASR transcripts.
    #[arg(long)]
    asr: PathBuf,
    /// Output directory for agreement.json and agreement_long.csv.
    #[arg(long)]
    out_dir: Option<PathBuf>,
    /// Optional `doc_id<TAB>subgroup` map.
    #[arg(long)]
    subgroups: Option<PathBuf>,
    /// Threshold for a "strong" correlation.
    #[arg(long)]
    strong_band: Option<f64>,
    /// Threshold for a "moderate" correlation.
    #[arg(long)]
    moderate_band: Option<f64>,
}

#[derive(Args)]
pub struct SelectArgs {
    /// Score table to filter.
    #[arg(long)]
    scores: PathBuf,
    /// Selection result JSON destination.
    #[arg(long)]
    out: PathBuf,
    /// Pairwise |r| above which one measure is removed.
    #[arg(long)]
    r_threshold: Option<f64>,
}

#[derive(Args)]
pub struct RankArgs {
    /// Score table to rank.
    #[arg(long)]
    scores: PathBuf,
    /// Ordinal labels CSV: `doc_id,label`.
    #[arg(long)]
    labels: PathBuf,
    /// Ranking CSV destination.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
pub struct ReportArgs {
    #[arg(long)]
    manual: PathBuf,
    #[arg(long)]
    asr: PathBuf,
    #[arg(long)]
    labels: PathBuf,
    #[arg(long)]
    out_dir: Option<PathBuf>,
    #[arg(long)]
    subgroups: Option<PathBuf>,
    #[arg(long)]
    strong_band: Option<f64>,
    #[arg(long)]
    moderate_band: Option<f64>,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    if let Some(jobs) = cli.jobs {
        // ignore failure: the global pool may already exist in tests
        let _ = rayon::ThreadPoolBuilder::new()
            .num_threads(jobs.max(1))
            .build_global();
    }
    let settings = match config::Settings::load(cli.config.as_deref()) {
        Ok(settings) => settings,
        Err(e) => {
            eprintln!("lingcomp: {}", e.message());
            return ExitCode::from(e.exit_code());
        }
    };
    let outcome = match cli.command {
        Command::Analyze(args) => commands::analyze(args, &settings),
        Command::Wer(args) => commands::wer(args, &settings),
        Command::Agree(args) => commands::agree(args, &settings),
        Command::Select(args) => commands::select(args, &settings),
        Command::Rank(args) => commands::rank(args, &settings),
        Command::Report(args) => commands::report(args, &settings),
    };
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("lingcomp: {}", e.message());
            ExitCode::from(e.exit_code())
        }
    }
}
