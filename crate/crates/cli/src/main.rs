use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use gaugelab_cli::{
    default_workers, plot, record::ResultRecord, run_config_file, RunError, EXIT_BAD_CONFIG,
    EXIT_CHECKS_FAILED, EXIT_NUMERICAL,
};

/// Holonomy-expectation experiments on Gaussian connection measures.
#[derive(Parser)]
#[command(name = "gaugelab", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run an experiment config and write JSON/CSV artifacts.
    Run {
        /// Path to a JSON experiment configuration.
        config: PathBuf,
        /// Override the config's seed.
        #[arg(long)]
        seed: Option<u64>,
        /// Directory for artifacts (defaults to the config's out_dir or ".").
        #[arg(long)]
        out_dir: Option<PathBuf>,
        /// Worker threads (defaults to GAUGELAB_WORKERS or 1).
        #[arg(long)]
        workers: Option<usize>,
        /// Suppress per-check PASS/FAIL lines.
        #[arg(long)]
        quiet: bool,
    },
    /// Extract plot-ready (x, y, yerr) CSV series from a result record.
    PlotData {
        /// Path to a JSON result record produced by `run`.
        record: PathBuf,
        /// Directory for the series files (defaults to ".").
        #[arg(long)]
        out_dir: Option<PathBuf>,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match cli.command {
        Command::Run {
            config,
            seed,
            out_dir,
            workers,
            quiet,
        } => {
            let workers = workers.unwrap_or_else(default_workers);
            match run_config_file(&config, seed, out_dir.as_deref(), workers, quiet) {
                Ok(outcome) => {
                    if !quiet {
                        for path in &outcome.artifacts {
                            eprintln!("wrote {}", path.display());
                        }
                    }
                    if outcome.record.all_pass() {
                        ExitCode::SUCCESS
                    } else {
                        ExitCode::from(EXIT_CHECKS_FAILED as u8)
                    }
                }
                Err(e @ RunError::Config(_)) => {
                    eprintln!("{e}");
                    ExitCode::from(EXIT_BAD_CONFIG as u8)
                }
                Err(e @ (RunError::Numerical(_) | RunError::Io(_))) => {
                    eprintln!("{e}");
                    ExitCode::from(EXIT_NUMERICAL as u8)
                }
            }
        }
        Command::PlotData { record, out_dir } => {
            let text = match std::fs::read_to_string(&record) {
                Ok(t) => t,
                Err(e) => {
                    eprintln!("cannot read record: {e}");
                    return ExitCode::from(EXIT_BAD_CONFIG as u8);
                }
            };
            let parsed: ResultRecord = match serde_json::from_str(&text) {
                Ok(r) => r,
                Err(e) => {
                    eprintln!("record is not a result JSON: {e}");
                    return ExitCode::from(EXIT_BAD_CONFIG as u8);
                }
            };
            let dir = out_dir.unwrap_or_else(|| PathBuf::from("."));
            match plot::emit_plot_data(&parsed, &dir) {
                Ok(paths) => {
                    for p in paths {
                        println!("wrote {}", p.display());
                    }
                    ExitCode::SUCCESS
                }
                Err(e) => {
                    eprintln!("plot extraction failed: {e:#}");
                    ExitCode::from(EXIT_NUMERICAL as u8)
                }
            }
        }
    }
}
