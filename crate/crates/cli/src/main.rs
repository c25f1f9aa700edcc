mod commands;
mod error;
mod manifest;
mod scene;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use commands::Method;

/// Field maps, solver runs, scenario simulation and codec checks for
/// mobile phased-array robots.
///
/// Exit codes: 0 success, 1 verdict failure, 2 config error, 3 domain error.
#[derive(Parser)]
#[command(name = "swarmpat", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Sample |p| over a plane; writes field.csv, field.pgm and manifest.json.
    Field {
        /// Scene JSON: medium, array, boards and grid window.
        #[arg(long)]
        config: PathBuf,
        /// Sampling plane as AXES@OFFSET, e.g. xz@0 or xy@0.05.
        #[arg(long, default_value = "xz@0")]
        plane: String,
        /// Lattice spacing, m.
        #[arg(long, default_value_t = 0.0005)]
        res: f64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Solve drives for focal targets; writes solve.json and manifest.json.
    Solve {
        #[arg(long)]
        config: PathBuf,
        /// Targets as x,y,z;x,y,z in metres.
        #[arg(long)]
        targets: String,
        #[arg(long, value_enum, default_value_t = Method::Focus)]
        method: Method,
        #[arg(long, default_value_t = 100)]
        iters: usize,
        /// Also emit each board's 130-byte frame payload in hex.
        #[arg(long)]
        quantize: bool,
        #[arg(long)]
        out: PathBuf,
    },
    /// Run a scenario; writes report.json, ticks.csv and manifest.json.
    Simulate {
        /// Scenario JSON.
        #[arg(long)]
        scenario: PathBuf,
        /// Simulation settings JSON replacing the scenario's `sim` block.
        #[arg(long)]
        config: Option<PathBuf>,
        /// Overrides the configured seed.
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Decode and re-encode hex frames, one per line.
    Codec {
        /// File of hex frames.
        #[arg(long)]
        config: PathBuf,
    },
}

fn main() -> ExitCode {
    let result = match Cli::parse().command {
        Command::Field { config, plane, res, out } => commands::field(&config, &plane, res, &out),
        Command::Solve { config, targets, method, iters, quantize, out } => {
            commands::solve(&config, &targets, method, iters, quantize, &out)
        }
        Command::Simulate { scenario, config, seed, out } => {
            commands::simulate(&scenario, config.as_deref(), seed, &out)
        }
        Command::Codec { config } => commands::codec(&config),
    };
    match result {
        Ok(summary) => {
            println!("{summary}");
            ExitCode::SUCCESS
        }
        Err(e) => {
            match &e {
                error::CliError::Verdict(msg) => println!("{msg}"),
                _ => eprintln!("error: {e}"),
            }
            e.exit_code()
        }
    }
}
