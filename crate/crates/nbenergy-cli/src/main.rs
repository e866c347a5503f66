//! `nbenergy`: simulate, analyze and size NB-IoT device energy behavior.
//!
//! Exit codes: 0 on success, 1 on domain errors (bad inputs, failed
//! validation, I/O), 2 on usage errors.

mod cli;
mod commands;
mod config;
mod tracefile;

use clap::Parser;

fn main() {
    let parsed = cli::Cli::parse();
    let result = match &parsed.command {
        cli::Command::Simulate(args) => commands::cmd_simulate(args),
        cli::Command::Analyze(args) => commands::cmd_analyze(args),
        cli::Command::Lifetime(args) => commands::cmd_lifetime(args),
        cli::Command::Radio(args) => commands::cmd_radio(&args.cmd),
    };
    if let Err(err) = result {
        eprintln!("error: {err:#}");
        std::process::exit(1);
    }
}
