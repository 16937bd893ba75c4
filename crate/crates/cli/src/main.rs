mod commands;
mod config;
mod report;

use std::process::ExitCode;

use clap::{Parser, Subcommand};

use config::RunArgs;

#[derive(Parser, Debug)]
#[command(name = "frontal", version, about = "Recover frontals from their Legendre data")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Sample the Legendre data of a gallery example on a grid.
    Sample(RunArgs),
    /// Reconstruct f on a grid from analytic or sampled Legendre data.
    Recover(RunArgs),
    /// Double-limit recovery at one point from a stage family.
    Limit(RunArgs),
    /// Choose a random perturbation of a gallery map and report its stages.
    Perturb(RunArgs),
    /// Export a triangulated surface as Wavefront OBJ.
    Mesh(RunArgs),
    /// Recover and compare against the closed forms.
    Verify(RunArgs),
}

/// Process exit codes.
pub mod exit {
    pub const OK: u8 = 0;
    pub const PARTIAL: u8 = 2;
    pub const FAILED: u8 = 3;
    pub const BAD_CONFIG: u8 = 4;
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { exit::BAD_CONFIG } else { exit::OK });
        }
    };
    let result = match cli.command {
        Command::Sample(a) => a.resolve().and_then(|c| commands::sample(&c)),
        Command::Recover(a) => a.resolve().and_then(|c| commands::recover(&c)),
        Command::Limit(a) => a.resolve().and_then(|c| commands::limit(&c)),
        Command::Perturb(a) => a.resolve().and_then(|c| commands::perturb(&c)),
        Command::Mesh(a) => a.resolve().and_then(|c| commands::mesh(&c)),
        Command::Verify(a) => a.resolve().and_then(|c| commands::verify(&c)),
    };
    match result {
        Ok(code) => ExitCode::from(code),
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}
