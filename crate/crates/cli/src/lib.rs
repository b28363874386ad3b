//! Command-line front end: argument parsing, data ingestion and dispatch.

pub mod args;
pub mod commands;
pub mod error;
pub mod input;

use args::{Cli, Command};
pub use error::{CliError, Result};

pub fn run(cli: &Cli) -> Result<()> {
    if let Some(t) = cli.threads {
        if t == 0 {
            return Err(CliError::Usage("--threads must be positive".into()));
        }
        // Fails only if a pool already exists, which is harmless.
        let _ = rayon::ThreadPoolBuilder::new().num_threads(t).build_global();
    }
    match &cli.command {
        Command::Dist(a) => commands::dist(a),
        Command::Roc(a) => commands::roc_cmd(a),
        Command::Select(a) => commands::select(a),
        Command::Test(a) => commands::test(a),
        Command::Simulate(a) => commands::simulate(a),
    }
}
