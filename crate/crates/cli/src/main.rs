//! `mpi-forge` command-line front end.
//!
//! Exit codes: 0 success, 1 invalid usage or input values, 2 unreadable or
//! unwritable files (including corrupt inputs), 3 a check that ran and failed.

mod args;
mod commands;
mod config;

use std::process::ExitCode;

use clap::Parser;
use log::LevelFilter;

use args::Cli;
use commands::CheckFailed;
use config::FileConfig;

/// Invalid flag or config values detected before any work starts.
#[derive(Debug)]
pub struct Usage(pub String);

impl std::fmt::Display for Usage {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for Usage {}

const EXIT_VALIDATION: u8 = 1;
const EXIT_IO: u8 = 2;
const EXIT_CHECK: u8 = 3;

fn exit_code(err: &anyhow::Error) -> u8 {
    for cause in err.chain() {
        if cause.is::<CheckFailed>() {
            return EXIT_CHECK;
        }
        if cause.is::<Usage>() {
            return EXIT_VALIDATION;
        }
        if cause.is::<std::io::Error>() || cause.is::<mpi_forge::FormatError>() {
            return EXIT_IO;
        }
        if let Some(e) = cause.downcast_ref::<mpi_forge::Error>() {
            return match e {
                mpi_forge::Error::Io(_) | mpi_forge::Error::Format(_) => EXIT_IO,
                _ => EXIT_VALIDATION,
            };
        }
    }
    EXIT_VALIDATION
}

fn init_logging(verbose: u8) {
    let level = match verbose {
        0 => LevelFilter::Warn,
        1 => LevelFilter::Info,
        _ => LevelFilter::Debug,
    };
    env_logger::Builder::new()
        .filter_level(level)
        .parse_default_env()
        .format_timestamp(None)
        .init();
}

fn configure_threads(threads: Option<usize>) -> anyhow::Result<()> {
    let Some(n) = threads else {
        return Ok(());
    };
    if n == 0 {
        anyhow::bail!(Usage("--threads must be at least 1".into()));
    }
    #[cfg(feature = "parallel")]
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| anyhow::anyhow!("thread pool: {e}"))?;
    #[cfg(not(feature = "parallel"))]
    log::warn!("built without the `parallel` feature; --threads {n} has no effect");
    Ok(())
}

fn run(cli: Cli) -> anyhow::Result<()> {
    let cfg = FileConfig::load(cli.config.as_deref())?;
    configure_threads(cli.threads.or(cfg.threads))?;
    commands::run(cli.command, &cfg)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { EXIT_VALIDATION } else { 0 });
        }
    };
    init_logging(cli.verbose);
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exit_code_classification() {
        let io = anyhow::Error::from(std::io::Error::new(std::io::ErrorKind::NotFound, "x"));
        assert_eq!(exit_code(&io), EXIT_IO);
        let wrapped = anyhow::Error::from(mpi_forge::Error::Io(std::io::Error::other("x"))).context("reading");
        assert_eq!(exit_code(&wrapped), EXIT_IO);
        assert_eq!(exit_code(&anyhow::Error::from(CheckFailed("x".into()))), EXIT_CHECK);
        assert_eq!(exit_code(&anyhow::Error::from(Usage("x".into()))), EXIT_VALIDATION);
        assert_eq!(exit_code(&anyhow::anyhow!("plain")), EXIT_VALIDATION);
    }
}
