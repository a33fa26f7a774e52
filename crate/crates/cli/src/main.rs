use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use linepack_cli::commands::{self, T2Method};
use linepack_cli::config;
use linepack_cli::error::{CliError, CliResult};

#[derive(Parser)]
#[command(
    name = "linepack",
    version,
    about = "Leak isolation transients and dispatch timing for a gas main"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum Method {
    Closed,
    Root,
    Both,
}

#[derive(Subcommand)]
enum Command {
    /// Evaluate a scenario and write section fields, timeline, dispatch report and manifest.
    Run {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Write pressures in Pa instead of 10⁻² MPa.
        #[arg(long)]
        si: bool,
    },
    /// Reproduce the reference tables and a per-cell diff report.
    Tables {
        #[arg(long)]
        out: PathBuf,
        /// Relative tolerance per cell.
        #[arg(long, default_value_t = 0.03)]
        tolerance: f64,
    },
    /// Compare the series with the finite-difference oracle.
    Verify {
        #[arg(long)]
        config: PathBuf,
    },
    /// Connector activation time.
    T2 {
        #[arg(long)]
        config: PathBuf,
        #[arg(long, value_enum, default_value_t = Method::Both)]
        method: Method,
    },
}

fn print_json(value: &impl serde::Serialize) {
    println!(
        "{}",
        serde_json::to_string_pretty(value).expect("report serialises")
    );
}

fn execute(cli: Cli) -> CliResult<()> {
    match cli.command {
        Command::Run { config, out, si } => {
            let (file, _) = config::load(&config)?;
            let summary = commands::run(&file, &out, si)?;
            print_json(&summary);
            Ok(())
        }
        Command::Tables { out, tolerance } => {
            let summary = commands::tables(&out, tolerance)?;
            print_json(&summary);
            Ok(())
        }
        Command::Verify { config } => {
            let (file, _) = config::load(&config)?;
            let report = commands::verify(&file)?;
            print_json(&report);
            if report.passed {
                Ok(())
            } else {
                Err(CliError::Verification(
                    "one or more checks exceeded their thresholds".into(),
                ))
            }
        }
        Command::T2 { config, method } => {
            let (file, _) = config::load(&config)?;
            let method = match method {
                Method::Closed => T2Method::Closed,
                Method::Root => T2Method::Root,
                Method::Both => T2Method::Both,
            };
            let report = commands::t2(&file, method)?;
            print_json(&report);
            eprintln!("{}", commands::describe_t2(&report));
            if report.failed() {
                Err(CliError::Numeric(linepack_core::Error::Domain(
                    "a requested activation method failed".into(),
                )))
            } else {
                Ok(())
            }
        }
    }
}

fn main() -> ExitCode {
    match execute(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("linepack: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
