use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use rbm_transfer::experiment::commands::OUTPUT_DIR_ENV;
use rbm_transfer::experiment::{resolve_output_dir, run_command, Command, ExperimentConfig};

#[derive(Parser)]
#[command(name = "rbmtl", version, about = "RBM training, feature ranking and adaptive transfer experiments")]
struct Cli {
    #[command(subcommand)]
    command: Sub,
    #[command(flatten)]
    common: Common,
}

#[derive(Subcommand)]
enum Sub {
    /// Train an RBM on `data` and save it.
    Train,
    /// Score and rank hidden units; write the ranking CSV and filter images.
    Rank,
    /// Probe accuracy while pruning low- or high-scoring units.
    PruneCurve,
    /// Rule extraction from RBMs trained on the XOR truth table.
    Xor {
        #[arg(long)]
        hidden: Option<usize>,
        #[arg(long)]
        seeds: Option<usize>,
    },
    /// Compare adaptive transfer against the baselines.
    Transfer,
    /// Accuracy grid over transferred (k) and added (m) units.
    Sweep,
    /// Probe accuracy of raw inputs or of a model's hidden features.
    Probe,
}

#[derive(Args)]
struct Common {
    /// JSON config file; every field is optional.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[arg(long, global = true, env = OUTPUT_DIR_ENV)]
    output_dir: Option<PathBuf>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[arg(long, global = true)]
    repeat: Option<usize>,
    /// Model JSON to use instead of training one.
    #[arg(long, global = true)]
    model: Option<PathBuf>,
    #[arg(long = "hidden-units", global = true)]
    hidden_units: Option<usize>,
    #[arg(long, global = true)]
    epochs: Option<usize>,
    #[arg(long, global = true)]
    learning_rate: Option<f64>,
    #[arg(long, global = true)]
    prune_step: Option<usize>,
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let c = &cli.common;

    let (mut config, base) = match &c.config {
        Some(p) => match ExperimentConfig::load(p) {
            Ok(v) => v,
            Err(e) => {
                eprintln!("error: {e}");
                return ExitCode::from(2);
            }
        },
        None => (ExperimentConfig::default(), PathBuf::from(".")),
    };
    if let Some(v) = c.seed {
        config.master_seed = v;
    }
    if let Some(v) = c.repeat {
        config.repeat = v;
    }
    if let Some(v) = &c.model {
        config.model = Some(std::env::current_dir().map(|d| d.join(v)).unwrap_or_else(|_| v.clone()));
    }
    if let Some(v) = c.hidden_units {
        config.hidden = v;
    }
    if let Some(v) = c.epochs {
        config.train.epochs = v;
        config.target_train.epochs = v;
    }
    if let Some(v) = c.learning_rate {
        config.train.learning_rate = v;
        config.target_train.learning_rate = v;
    }
    if let Some(v) = c.prune_step {
        config.prune_step = v;
    }
    let command = match cli.command {
        Sub::Train => Command::Train,
        Sub::Rank => Command::Rank,
        Sub::PruneCurve => Command::PruneCurve,
        Sub::Xor { hidden, seeds } => {
            if let Some(h) = hidden {
                config.xor.hidden = h;
            }
            if let Some(s) = seeds {
                config.xor.seeds = s;
            }
            Command::Xor
        }
        Sub::Transfer => Command::Transfer,
        Sub::Sweep => Command::Sweep,
        Sub::Probe => Command::Probe,
    };

    let out_dir = resolve_output_dir(c.output_dir.as_deref(), &config);
    match run_command(command, &config, &base, &out_dir) {
        Ok(o) => {
            println!("{}", o.summary.trim_end());
            println!("wrote {} files to {}", o.manifest.outputs.len() + 1, o.output_dir.display());
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(if e.is_data_error() { 3 } else { 2 })
        }
    }
}
