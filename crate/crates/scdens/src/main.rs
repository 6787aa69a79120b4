use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use scdens::cli;
use scdens::Error;

#[derive(Parser)]
#[command(
    name = "scdens",
    version,
    about = "Quantum vs semiclassical fermion densities: reproducible diagnostic runs"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Execute the diagnostics in a TOML config and write CSV curves plus
    /// a JSON manifest
    Run { config: PathBuf },
    /// Run the built-in cross-module oracle checks and print one pass/fail
    /// line per check
    Validate,
    /// Solve the configured model's spectrum and write it as JSON
    ExportSpectrum { config: PathBuf },
}

fn main() -> ExitCode {
    let parsed = match Cli::try_parse() {
        Ok(p) => p,
        Err(e) => {
            use clap::error::ErrorKind;
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match parsed.command {
        Command::Run { config } => match cli::run(&config) {
            Ok(outcome) => {
                for f in &outcome.files {
                    println!("wrote {}", f.display());
                }
                println!("wrote {}", outcome.manifest_path.display());
                ExitCode::SUCCESS
            }
            Err(e) => failure(e),
        },
        Command::Validate => {
            let report = cli::validate_suite();
            print!("{report}");
            if report.all_passed() {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(2)
            }
        }
        Command::ExportSpectrum { config } => match cli::export_spectrum(&config) {
            Ok(path) => {
                println!("wrote {}", path.display());
                ExitCode::SUCCESS
            }
            Err(e) => failure(e),
        },
    }
}

/// Exit 1 for configuration problems, 2 for numerical ones.
fn failure(e: Error) -> ExitCode {
    eprintln!("error: {e}");
    let code = match e {
        Error::Config(_) | Error::Io(_) | Error::Json(_) | Error::ParticleNumber(_) => 1,
        _ => 2,
    };
    ExitCode::from(code)
}
