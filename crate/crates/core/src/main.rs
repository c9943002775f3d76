use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use datashap::config::ExperimentConfig;
use datashap::runner;

/// Training-data valuation experiments: Shapley attribution, amortized
/// explainers, and removal-curve evaluation.
#[derive(Parser)]
#[command(name = "datashap", version, disable_help_subcommand = true)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct CommonFlags {
    /// Override the config's root seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Override the config's output directory.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Worker threads for utility evaluations.
    #[arg(long, default_value_t = 1)]
    threads: usize,
}

#[derive(Subcommand)]
enum Command {
    /// Execute an experiment config and write its artifacts.
    Run {
        config: PathBuf,
        #[command(flatten)]
        flags: CommonFlags,
    },
    /// Aggregate completed runs into an H_η comparison table.
    Compare { dir: PathBuf },
    /// Print exact, leave-one-out, and TMC values for a tabular game file.
    Oracle {
        game_file: PathBuf,
        /// Seed for the TMC estimate.
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Emit a CSV header line.
        #[arg(long)]
        header: bool,
    },
}

fn execute(cli: Cli) -> datashap::Result<()> {
    match cli.command {
        Command::Run { config, flags } => {
            let mut cfg = ExperimentConfig::load(&config)?;
            if let Some(seed) = flags.seed {
                cfg.seed = seed;
            }
            if let Some(out) = flags.out {
                cfg.out_dir = out;
            }
            let report = runner::run(&cfg, flags.threads)?;
            println!("wrote artifacts to {}", report.out_dir.display());
            for (phase, secs) in &report.timings {
                println!("{phase}: {secs:.3}s");
            }
            Ok(())
        }
        Command::Compare { dir } => {
            print!("{}", runner::compare(&dir)?);
            Ok(())
        }
        Command::Oracle { game_file, seed, header } => {
            print!("{}", runner::oracle_report(&game_file, seed, header)?);
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(err.exit_code() as u8)
        }
    }
}
