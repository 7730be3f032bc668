use std::process::ExitCode;

use clap::Parser;
use portfolio_admm_cli::args::Cli;

fn main() -> ExitCode {
    let cli = Cli::parse();
    ExitCode::from(portfolio_admm_cli::run(&cli))
}
