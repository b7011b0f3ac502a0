use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use monogenic::config::{self, GENERATORS};
use monogenic::experiment::{self, Overrides};

#[derive(Parser)]
#[command(name = "monogenic", version, about = "Experiments on octonion-valued monogenic functions")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run an experiment config and write CSV and summary.json.
    Run {
        #[arg(long)]
        config: PathBuf,
        #[arg(long, default_value = ".")]
        out: PathBuf,
        /// Overrides the seed in the config.
        #[arg(long)]
        seed: Option<u64>,
        /// Multiplies every sample budget.
        #[arg(long, default_value_t = 1.0)]
        budget_scale: f64,
    },
    /// Print the available field generators.
    ListGenerators,
    /// Print the schema and defaults of an experiment kind.
    Describe { kind: String },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Err(e) = monogenic::self_check() {
        eprintln!("self-check failed: {e}");
        return ExitCode::from(1);
    }
    match cli.command {
        Command::ListGenerators => {
            for g in GENERATORS {
                println!("{g}");
            }
            ExitCode::SUCCESS
        }
        Command::Describe { kind } => match config::describe(&kind) {
            Ok(text) => {
                print!("{text}");
                ExitCode::SUCCESS
            }
            Err(e) => {
                eprintln!("error: {e}");
                ExitCode::from(1)
            }
        },
        Command::Run { config, out, seed, budget_scale } => {
            let text = match std::fs::read_to_string(&config) {
                Ok(t) => t,
                Err(e) => {
                    eprintln!("error: cannot read {}: {e}", config.display());
                    return ExitCode::from(1);
                }
            };
            let result = experiment::run_text(&text, Overrides { seed, budget_scale })
                .and_then(|(cfg, outcome)| outcome.write(&out, &cfg.output).map(|_| outcome));
            match result {
                Ok(outcome) => {
                    for a in &outcome.summary.assertions {
                        let tag = if a.passed { "pass" } else if a.gating { "FAIL" } else { "warn" };
                        println!("{tag} {}: {}", a.name, a.detail);
                    }
                    for f in &outcome.summary.flags {
                        println!("flag {f}");
                    }
                    ExitCode::from(outcome.exit_code() as u8)
                }
                Err(e) => {
                    eprintln!("error: {e}");
                    ExitCode::from(1)
                }
            }
        }
    }
}
