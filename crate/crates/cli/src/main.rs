mod commands;
mod config;
mod error;
mod output;

use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::{Parser, Subcommand};

use config::{Opts, RunConfig};
use error::CliError;

#[derive(Parser)]
#[command(
    name = "fkm",
    version,
    about = "Harmonic maps and Kuramoto equilibria on Sierpinski gasket and ring graphs"
)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Export the level-n graph and the harmonic structure.
    BuildGraph(Opts),
    /// Solve the Dirichlet problem for given boundary values.
    Harmonic(Opts),
    /// Build the covering domain for a degree and solve the constrained minimization.
    Covering(Opts),
    /// Harmonic map of a degree, projected and relaxed to a Kuramoto equilibrium.
    Twist(Opts),
    /// Kuramoto flow or descent from a chosen initial state.
    Flow(Opts),
    /// Table of lift energy, Kuramoto energy and their gap over a range of levels.
    Verify(Opts),
    /// Twist runs over a grid of degrees and levels.
    Sweep(Opts),
}

type Handler = fn(&RunConfig) -> Result<commands::Done, CliError>;

fn run(cmd: Cmd) -> Result<Vec<String>, CliError> {
    let (mode, opts, f): (&str, Opts, Handler) = match cmd {
        Cmd::BuildGraph(o) => ("build-graph", o, commands::build_graph),
        Cmd::Harmonic(o) => ("harmonic", o, commands::harmonic),
        Cmd::Covering(o) => ("covering", o, commands::covering),
        Cmd::Twist(o) => ("twist", o, commands::twist),
        Cmd::Flow(o) => ("flow", o, commands::flow),
        Cmd::Verify(o) => ("verify", o, commands::verify),
        Cmd::Sweep(o) => ("sweep", o, commands::sweep),
    };
    let cfg = RunConfig::resolve(mode, &opts)?;
    let done = f(&cfg)?;
    let root = done.out.finish(mode, &cfg)?;
    let mut lines = done.summary;
    lines.push(format!("wrote {}", root.join("manifest.json").display()));
    Ok(lines)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                print!("{e}");
                return ExitCode::SUCCESS;
            }
            let text = e.to_string();
            let first = text.lines().next().unwrap_or("").trim_start_matches("error: ");
            eprintln!("{}", CliError::Usage(first.to_string()).line());
            return ExitCode::from(2);
        }
    };
    match run(cli.cmd) {
        Ok(lines) => {
            for l in lines {
                println!("{l}");
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("{}", e.line());
            ExitCode::FAILURE
        }
    }
}
