//! File formats, configuration and subcommands of the `omori-hawkes` tool.
//!
//! Exit codes: 0 success, 2 configuration, 3 data, 4 numerical
//! non-convergence, 5 file access. See [`CliError`].

pub mod cli;
pub mod commands;
pub mod config;
pub mod error;
pub mod io;

pub use cli::Cli;
pub use commands::Outcome;
pub use error::{CliError, Result};

use cli::Command;
use config::ConfigFile;

pub fn run(cli: Cli) -> Result<Outcome> {
    let file = match &cli.config {
        Some(path) => ConfigFile::load(path)?,
        None => ConfigFile::default(),
    };
    let out_dir = cli.out_dir;
    match cli.command {
        Command::Simulate(a) => commands::simulate::run(a, &file, out_dir),
        Command::Fit(a) => commands::fit::run(a, &file, out_dir),
        Command::Curves(a) => commands::curves::run(a, &file, out_dir),
        Command::Scaling(a) => commands::scaling::run(a, &file, out_dir),
        Command::Pipeline(a) => commands::pipeline::run(a, &file, out_dir),
    }
}
