use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use park_core::pipeline::{PipelineConfig, Stage, Workspace};
use park_core::par;

#[derive(Parser)]
#[command(name = "park", version, about = "Personalized academic retrieval pipeline")]
struct Cli {
    /// TOML configuration file; built-in defaults when omitted.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Overrides `paths.workdir`.
    #[arg(long, global = true)]
    workdir: Option<PathBuf>,
    /// Overrides the master seed.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Worker threads; 1 runs everything sequentially and deterministically.
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Only print warnings and errors.
    #[arg(long, short, global = true)]
    quiet: bool,
    /// Accept upstream artifacts built with a different configuration.
    #[arg(long, global = true)]
    allow_stale: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Clone, Copy)]
enum Command {
    /// Generate the synthetic corpus.
    Synth,
    /// Load and validate the corpus, split it by year and derive queries.
    Ingest,
    /// Build the BM25 index and the relevance judgments.
    Index,
    /// Train the dense query/document encoder.
    TrainDense,
    /// Embed every document with the trained encoder.
    Embed,
    /// Build the knowledge graph variants.
    BuildKg,
    /// Train the knowledge graph embeddings.
    TrainKg,
    /// Retrieve candidates and compute every score channel.
    Score,
    /// Tune the fusion weights on the validation queries.
    Tune,
    /// Evaluate every system on the test queries.
    Eval,
    /// Produce the node-type ablation table.
    Ablate,
    /// Run every stage in order.
    EndToEnd,
    /// Print the effective configuration as TOML.
    PrintConfig,
}

impl Command {
    fn stage(self) -> Option<Stage> {
        Some(match self {
            Command::Synth => Stage::Synth,
            Command::Ingest => Stage::Ingest,
            Command::Index => Stage::Index,
            Command::TrainDense => Stage::TrainDense,
            Command::Embed => Stage::Embed,
            Command::BuildKg => Stage::BuildKg,
            Command::TrainKg => Stage::TrainKg,
            Command::Score => Stage::Score,
            Command::Tune => Stage::Tune,
            Command::Eval => Stage::Eval,
            Command::Ablate => Stage::Ablate,
            Command::EndToEnd | Command::PrintConfig => return None,
        })
    }
}

fn run(cli: Cli) -> park_core::Result<()> {
    let mut cfg = match &cli.config {
        Some(p) => PipelineConfig::load(p)?,
        None => PipelineConfig::default(),
    };
    if let Some(w) = cli.workdir {
        cfg.paths.workdir = w;
    }
    if let Some(s) = cli.seed {
        cfg.seed = s;
    }
    cfg.validate()?;
    if let Command::PrintConfig = cli.command {
        print!("{}", cfg.to_toml());
        return Ok(());
    }
    let ws = Workspace::new(cfg, cli.allow_stale)?;
    match cli.command.stage() {
        Some(stage) => ws.run(stage),
        None => {
            ws.end_to_end()?;
            let report = ws.dir(Stage::Eval).join("report.txt");
            let ablation = ws.dir(Stage::Ablate).join("ablation.txt");
            for p in [report, ablation] {
                if let Ok(text) = std::fs::read_to_string(&p) {
                    println!("{text}");
                }
            }
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let level = if cli.quiet { "warn" } else { "info" };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level))
        .format_timestamp(None)
        .init();
    par::init_pool(cli.threads.unwrap_or(0));
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
