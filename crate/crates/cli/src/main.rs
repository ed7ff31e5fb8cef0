use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use qmg_cli::{emit_plotdata, run_scenario, PlotRequest, RunOptions};

/// Quantum market game experiments.
#[derive(Parser)]
#[command(name = "qmg", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a scenario file and write its outputs and manifest.
    Run {
        scenario: PathBuf,
        /// Output directory; overrides the scenario's `output`.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Seed; overrides every seed in the scenario.
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Turn a CSV into plot-data JSON.
    Plotdata {
        csv: PathBuf,
        #[arg(long)]
        x: String,
        /// Comma-separated column names.
        #[arg(long, value_delimiter = ',', required = true)]
        y: Vec<String>,
        #[arg(long)]
        out: Option<PathBuf>,
        /// Hint a logarithmic x axis.
        #[arg(long)]
        log_x: bool,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Run { scenario, out, seed } => run_scenario(&scenario, &RunOptions { out, seed }).map(|r| {
            for f in &r.files {
                println!("{}", f.display());
            }
        }),
        Command::Plotdata { csv, x, y, out, log_x } => {
            let req = PlotRequest { csv, x, y, out, log_x: log_x.then_some(true) };
            emit_plotdata(&req).map(|p| println!("{}", p.display()))
        }
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("qmg: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
