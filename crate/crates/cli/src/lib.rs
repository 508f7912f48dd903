//! Command-line front end: argument definitions, command implementations
//! and report writers. The `contrafact` binary is a thin wrapper over
//! [`run`].

pub mod args;
pub mod commands;
pub mod error;
pub mod output;

pub use args::Cli;
pub use error::{exit, CliError, Result};

use args::Command;

/// Runs one command on a thread pool of `cli.threads` workers and returns
/// the text for standard output.
pub fn run(cli: &Cli) -> Result<String> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cli.threads)
        .build()
        .map_err(|e| CliError::Usage(format!("cannot start {} threads: {e}", cli.threads)))?;
    pool.install(|| match &cli.command {
        Command::Validate(a) => commands::validate(a),
        Command::Compute(a) => commands::compute(a),
        Command::Counterfactual(a) => commands::counterfactual(a),
        Command::Diagnose(a) => commands::diagnose(a),
        Command::Synth(a) => commands::synth(a),
        Command::Presets(a) => commands::presets(a),
    })
}
