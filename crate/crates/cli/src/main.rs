//! Experiment CLI: generate → train → explain → evaluate, plus the
//! window-size sweep, the smoothing ablation, and SVG report rendering.
//!
//! Exit codes: 0 success, 2 configuration error, 3 training failure,
//! 4 numeric error, 1 anything else.

mod commands;
mod config;
mod manifest;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use tshap_core::TshapError;

#[derive(Parser)]
#[command(name = "tshap", version, about = "Skeleton activity pipeline with temporally smoothed Shapley explanations")]
struct Cli {
    /// JSON configuration file (defaults apply when omitted).
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Override a config field, e.g. --set model.hidden_dim=32
    /// (precedence: CLI > file > defaults).
    #[arg(long = "set", global = true, value_name = "KEY=VALUE")]
    sets: Vec<String>,

    /// Output directory (overrides config and $TSHAP_OUT_ROOT).
    #[arg(long, global = true)]
    out: Option<String>,

    /// Rank perturbation cells by |attribution| instead of signed values
    /// (shorthand for --set evaluation.abs_rank=true).
    #[arg(long, global = true)]
    abs_rank: bool,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Synthesize the dataset CSV and its manifest.
    Generate,
    /// Train one model per fold and write checkpoints plus fold metrics.
    Train,
    /// Write attribution CSVs for one fold's test sequences.
    Explain {
        /// Fold whose checkpoint and test set are explained.
        #[arg(long, default_value_t = 0)]
        fold: usize,
    },
    /// Run the full cross-method evaluation and figure-data files.
    Evaluate,
    /// Window-size sensitivity sweep: AUP per half-window at fixed accuracy.
    SweepW {
        /// Half-window sizes to compare.
        #[arg(long, value_delimiter = ',', default_values_t = vec![1, 2, 3])]
        windows: Vec<usize>,
    },
    /// Uniform vs EWMA smoothing ablation.
    Ablate,
    /// Render SVG heatmaps from the emitted heatmap CSVs.
    Report,
}

fn exit_code_for(err: &TshapError) -> u8 {
    match err {
        TshapError::InvalidArgument(_) | TshapError::Parse(_) | TshapError::WrongModelKind { .. } => 2,
        TshapError::TrainingFailure { .. } => 3,
        TshapError::NumericOverflow { .. }
        | TshapError::DegenerateInput(_)
        | TshapError::DegenerateVariance
        | TshapError::UndefinedMetric(_)
        | TshapError::DegenerateBaseline => 4,
        TshapError::Io(_) | TshapError::Json(_) => 1,
    }
}

fn run(cli: &Cli) -> tshap_core::Result<()> {
    let mut sets = cli.sets.clone();
    if cli.abs_rank {
        sets.push("evaluation.abs_rank=true".to_string());
    }
    let cfg = config::resolve_config(cli.config.as_deref(), &sets, cli.out.as_deref())?;
    match &cli.command {
        Command::Generate => commands::generate::run(&cfg),
        Command::Train => commands::train::run(&cfg),
        Command::Explain { fold } => commands::explain::run(&cfg, *fold),
        Command::Evaluate => commands::evaluate::run(&cfg),
        Command::SweepW { windows } => commands::sweep::run(&cfg, windows),
        Command::Ablate => commands::ablate::run(&cfg),
        Command::Report => commands::report::run(&cfg),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(exit_code_for(&err))
        }
    }
}
