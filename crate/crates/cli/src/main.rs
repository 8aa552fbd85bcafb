//! `zermelo`: batch command-line access to the geodesic, cusp and
//! reachability computations, writing CSV/JSON data and SVG plots.

mod commands;
mod config;
mod error;
mod output;
mod svg;

use std::process::ExitCode;

use clap::{Parser, Subcommand};

use crate::config::{CommonArgs, RunConfig};
use crate::error::CliError;

#[derive(Debug, Parser)]
#[command(
    name = "zermelo",
    version,
    about = "Geodesics of Zermelo navigation problems with rotational symmetry"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Bracket determinants and extremal class of a state.
    Classify(CommonArgs),
    /// Integrate a geodesic with residual diagnostics.
    Integrate(CommonArgs),
    /// Cusp of the abnormal geodesic through a state.
    Cusp(CommonArgs),
    /// Wavefront at time t, tagged by class and sphere membership.
    Wavefront(CommonArgs),
    /// Small time-minimal sphere and ball boundary.
    Ball(CommonArgs),
    /// Value function along a segment, with jump detection.
    Value(CommonArgs),
    /// Optimal synthesis and cut locus near a strong-current point.
    Synthesis(CommonArgs),
}

type Handler = fn(&RunConfig) -> Result<serde_json::Value, CliError>;

fn run(cli: Cli) -> Result<serde_json::Value, CliError> {
    let (args, cmd): (&CommonArgs, Handler) = match &cli.command {
        Command::Classify(a) => (a, commands::classify_cmd),
        Command::Integrate(a) => (a, commands::integrate_cmd),
        Command::Cusp(a) => (a, commands::cusp_cmd),
        Command::Wavefront(a) => (a, commands::wavefront_cmd),
        Command::Ball(a) => (a, commands::ball_cmd),
        Command::Value(a) => (a, commands::value_cmd),
        Command::Synthesis(a) => (a, commands::synthesis_cmd),
    };
    cmd(&RunConfig::from_args(args)?)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(summary) => {
            print!("{}", output::json_string(&summary));
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("zermelo: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
