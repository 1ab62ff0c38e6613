use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use coherent::commands;
use coherent::config::EmbeddingSource;
use coherent::{CliResult, ExperimentConfig, Overrides};

type Step = fn(&ExperimentConfig) -> CliResult<String>;

/// Recover coherent probabilities from embeddings with a constrained VAE.
#[derive(Debug, Parser)]
#[command(name = "coherent", version)]
struct Cli {
    /// TOML experiment config; built-in defaults when omitted.
    #[arg(long, short, global = true)]
    config: Option<PathBuf>,
    /// Overrides `experiment.seed`.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Overrides `experiment.out`.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Report even when upstream artifacts came from a different config.
    #[arg(long, global = true)]
    force: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Write the train and test dice corpora.
    Generate,
    /// Write synthetic planted-factor embeddings for both corpora.
    Synth,
    /// Train the constrained VAE and write recovered probabilities.
    Train,
    /// Train the Step-1-only model and write its recovered probabilities.
    Ablate,
    /// Fit minimum-norm linear probes.
    Probe,
    /// Lasso of prompt features onto latent means.
    Lasso,
    /// Compare every available probability source.
    Report,
    /// Run every step in order.
    All,
    /// Print the resolved config as TOML.
    Config,
}

fn run(cli: &Cli) -> CliResult<()> {
    let overrides = Overrides {
        seed: cli.seed,
        out: cli.out.clone(),
        force: cli.force,
    };
    let cfg = ExperimentConfig::load(cli.config.as_deref(), &overrides)?;
    let steps: Vec<Step> = match cli.command {
        Command::Generate => vec![commands::cmd_generate],
        Command::Synth => vec![commands::cmd_synth],
        Command::Train => vec![commands::cmd_train],
        Command::Ablate => vec![commands::cmd_ablate],
        Command::Probe => vec![commands::cmd_probe],
        Command::Lasso => vec![commands::cmd_lasso],
        Command::Report => vec![commands::cmd_report],
        Command::All => {
            let mut all: Vec<Step> = vec![commands::cmd_generate];
            if cfg.embeddings.source == EmbeddingSource::Synthetic {
                all.push(commands::cmd_synth);
            }
            all.extend([
                commands::cmd_train as Step,
                commands::cmd_ablate,
                commands::cmd_probe,
                commands::cmd_lasso,
                commands::cmd_report,
            ]);
            all
        }
        Command::Config => {
            print!("{}", cfg.to_toml()?);
            return Ok(());
        }
    };
    for step in steps {
        println!("{}", step(&cfg)?);
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
