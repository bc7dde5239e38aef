//! Command-line entry point: runs scenario files and built-in demos.
//!
//! Exit codes: 0 when every embedded assertion passes, 1 on assertion
//! failure, 2 on parse or validation errors.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use chanforge::cli::{demo_names, demo_scenario, emit_table, run_file, run_scenario, Overrides, Report};

#[derive(Parser)]
#[command(name = "chanforge", version, about = "Noisy-channel control toolkit")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a JSON scenario file and print its report table.
    Run {
        /// Path to the scenario JSON file.
        scenario: PathBuf,
        /// Write the JSON report here.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Override the relative eigenvalue cutoff.
        #[arg(long)]
        eps_rank: Option<f64>,
        /// Override the random seed.
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Run a built-in demo scenario (`list` prints the available names).
    Demo {
        /// Demo name, or `list`.
        name: String,
        /// Write the JSON report here.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn finish(report: &Report, out: Option<&PathBuf>) -> ExitCode {
    if let Some(path) = out {
        let text = match serde_json::to_string_pretty(report) {
            Ok(text) => text,
            Err(err) => {
                eprintln!("error: cannot serialize report: {err}");
                return ExitCode::from(2);
            }
        };
        if let Err(err) = std::fs::write(path, text) {
            eprintln!("error: cannot write {}: {err}", path.display());
            return ExitCode::from(2);
        }
    }
    print!("{}", emit_table(report));
    if report.passed {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(1)
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match cli.command {
        Command::Run { scenario, out, eps_rank, seed } => {
            match run_file(&scenario, &Overrides { eps_rank, seed }) {
                Ok(report) => finish(&report, out.as_ref()),
                Err(err) => {
                    eprintln!("error: {err}");
                    ExitCode::from(2)
                }
            }
        }
        Command::Demo { name, out } => {
            if name == "list" {
                for demo in demo_names() {
                    println!("{demo}");
                }
                return ExitCode::SUCCESS;
            }
            let Some(scenario) = demo_scenario(&name) else {
                eprintln!("error: unknown demo {name:?}; try `chanforge demo list`");
                return ExitCode::from(2);
            };
            match run_scenario(&scenario, &Overrides::default()) {
                Ok(report) => finish(&report, out.as_ref()),
                Err(err) => {
                    eprintln!("error: {err}");
                    ExitCode::from(2)
                }
            }
        }
    }
}
