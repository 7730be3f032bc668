//! Command-line front end for the `portfolio-admm` solver.
//!
//! Exit status is 0 on success, 2 for usage or input errors and 3 when a
//! solve stops without converging.

pub mod args;
pub mod bench;
pub mod commands;
pub mod report;

use args::{Cli, Command};
use commands::{Outcome, INPUT_ERROR_EXIT};

/// Dispatches a parsed command line and returns the process exit status.
pub fn run(cli: &Cli) -> u8 {
    let outcome = match &cli.command {
        Command::Gen(a) => commands::cmd_gen(a),
        Command::Solve(a) => commands::cmd_solve(a),
        Command::Frontier(a) => commands::cmd_frontier(a),
        Command::Bench(a) => commands::cmd_bench(a),
    };
    match outcome {
        Ok(o) => {
            if o == Outcome::NotConverged {
                eprintln!("warning: solver did not converge");
            }
            o.exit_code()
        }
        Err(err) => {
            eprintln!("error: {err:#}");
            INPUT_ERROR_EXIT
        }
    }
}
