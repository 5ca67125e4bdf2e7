//! Library side of the `mpgfrft` binary, so the dispatch logic can be driven
//! from tests.

pub mod args;
pub mod commands;
pub mod config;
pub mod error;

pub use args::Cli;
pub use error::{CliError, CliResult};

use config::ConfigFile;

/// Runs one command and prints its output. `Ok(false)` means the command
/// ran but reported failures (selftest).
pub fn run(cli: Cli) -> CliResult<bool> {
    let file = match &cli.global.config {
        Some(p) => ConfigFile::load(p)?,
        None => ConfigFile::default(),
    };
    let globals = file.globals(cli.global.seed, cli.global.threads, cli.global.output_format)?;
    if let Some(t) = globals.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(t)
            .build_global()
            .map_err(|e| CliError::Config(format!("thread pool: {e}")))?;
    }
    let out = commands::dispatch(&cli.command, &file, &globals)?;
    print!("{}", out.render(globals.output_format));
    Ok(out.ok)
}
