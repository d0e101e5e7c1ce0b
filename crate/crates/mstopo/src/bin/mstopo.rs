//! Command-line front end for the pipeline: `gen-library`, `fit`,
//! `optimize`, `render`. All logic lives in the library; this binary only
//! parses arguments and maps results to exit codes (0 success/converged,
//! 2 iteration cap reached, 1 error).

use std::error::Error as _;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use mstopo::cli::{Command, Invocation};

#[derive(Parser)]
#[command(name = "mstopo", version, about = "Multiscale topology optimization toolkit")]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Build the microstructure library and homogenized property dataset.
    GenLibrary(CommonArgs),
    /// Fit the latent-variable surrogate and run the holdout validation.
    Fit(CommonArgs),
    /// Run the multiscale compliance optimization.
    Optimize(CommonArgs),
    /// Render images from a saved design field.
    Render(CommonArgs),
}

#[derive(Args)]
struct CommonArgs {
    /// TOML run configuration; built-in defaults apply when omitted.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Master seed; overrides the config value.
    #[arg(long)]
    seed: Option<u64>,
    /// Output directory; overrides the config value.
    #[arg(long)]
    out: Option<PathBuf>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (command, args) = match cli.command {
        Cmd::GenLibrary(args) => (Command::GenLibrary, args),
        Cmd::Fit(args) => (Command::Fit, args),
        Cmd::Optimize(args) => (Command::Optimize, args),
        Cmd::Render(args) => (Command::Render, args),
    };
    let invocation = Invocation {
        command,
        config: args.config,
        seed: args.seed,
        out: args.out,
    };
    match invocation.run() {
        Ok(code) => ExitCode::from(code as u8),
        Err(err) => {
            eprintln!("error: {err}");
            let mut source = err.source();
            while let Some(cause) = source {
                eprintln!("  caused by: {cause}");
                source = cause.source();
            }
            ExitCode::FAILURE
        }
    }
}
