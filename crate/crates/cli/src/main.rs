//! `snlevy`: scale functions, shape certificates, de Finetti's dividend
//! problem and Monte Carlo checks for spectrally negative Lévy models.

mod args;
mod commands;
mod output;
mod verify;

use std::process::ExitCode;

use clap::Parser;

use args::{Cli, Command};
use output::Failure;

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { output::EXIT_USAGE } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let result = match &cli.command {
        Command::ComputeScale(a) => commands::compute_scale(&cli, a),
        Command::AnalyzeShape(a) => commands::analyze_shape(&cli, a),
        Command::SolveDefinetti(a) => commands::solve_definetti(&cli, a),
        Command::Simulate(a) => commands::simulate(&cli, a),
        Command::Verify(a) => verify::run(&cli, a),
    };
    match result {
        Ok(code) => ExitCode::from(code),
        Err(Failure { code, message }) => {
            eprintln!("{message}");
            ExitCode::from(code)
        }
    }
}
