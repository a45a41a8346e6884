//! `bioie`: ingest corpora, build text graphs, train, cross-validate,
//! ablate, transfer, evaluate and predict from a flat config file.

mod commands;
mod config;
mod data;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

#[derive(Parser)]
#[command(name = "bioie", version, about = "Document-level biomedical relation extraction")]
struct Cli {
    /// Log progress to stderr (RUST_LOG overrides).
    #[arg(short, long, global = true)]
    verbose: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// `key = value` config file.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Override one key; repeatable, the last occurrence wins.
    #[arg(long = "set", value_name = "KEY=VALUE", value_parser = config::parse_override)]
    set: Vec<(String, String)>,
    /// Run directory (same as `--set out=DIR`).
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct WithCheckpoint {
    #[command(flatten)]
    common: Common,
    /// Checkpoint to load (same as `--set checkpoint=PATH`).
    #[arg(long)]
    checkpoint: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Parse a corpus and print document, mention and candidate counts.
    Ingest(Common),
    /// Build the three corpus graphs and dump their edge lists.
    BuildGraphs(Common),
    /// Train on a held-out split and save a checkpoint.
    Train(Common),
    /// k-fold cross-validation.
    Cv(Common),
    /// Train and test the seven ablation variants.
    Ablate(Common),
    /// Train on one corpus, fine-tune on the other, both directions.
    Transfer(Common),
    /// Score a checkpoint on the configured corpus.
    Eval(WithCheckpoint),
    /// Label every candidate pair of the configured corpus.
    Predict(WithCheckpoint),
    /// Generate a synthetic pathology corpus as a record file.
    Synth(Common),
}

type Runner = fn(&config::RunConfig) -> bioie::Result<()>;

fn main() -> ExitCode {
    let cli = Cli::try_parse().unwrap_or_else(|e| e.exit());
    let level = if cli.verbose { "info" } else { "warn" };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level)).init();
    let (common, checkpoint, run): (Common, Option<PathBuf>, Runner) = match cli.command {
        Command::Ingest(c) => (c, None, commands::ingest),
        Command::BuildGraphs(c) => (c, None, commands::build_graphs),
        Command::Train(c) => (c, None, commands::train),
        Command::Cv(c) => (c, None, commands::cv),
        Command::Ablate(c) => (c, None, commands::ablate),
        Command::Transfer(c) => (c, None, commands::transfer),
        Command::Eval(c) => (c.common, c.checkpoint, commands::eval),
        Command::Predict(c) => (c.common, c.checkpoint, commands::predict_cmd),
        Command::Synth(c) => (c, None, commands::synth),
    };
    let mut overrides = common.set;
    if let Some(out) = common.out {
        overrides.push(("out".into(), out.display().to_string()));
    }
    if let Some(ckpt) = checkpoint {
        overrides.push(("checkpoint".into(), ckpt.display().to_string()));
    }
    let env_seed = std::env::var("BIOIE_SEED").ok();
    let result = config::resolve(common.config.as_deref(), &overrides, env_seed.as_deref())
        .and_then(|cfg| run(&cfg).map_err(|e| e.to_string()));
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(msg) => {
            eprintln!("error: {}", msg.replace('\n', " "));
            ExitCode::from(1)
        }
    }
}
