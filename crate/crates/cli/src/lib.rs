//! Command-line front end: flag and config resolution, the five commands,
//! and the mapping from outcomes to exit codes.

pub mod commands;
pub mod config;

use clap::Parser;
use config::{Cli, CommandKind, RunConfig};
use std::ffi::OsString;
use std::io::Write;
use thiserror::Error;

pub use commands::{cmd_bounds, cmd_lp, cmd_optimize, cmd_table, cmd_verify, Report};
pub use config::Format;

pub const EXIT_OK: i32 = 0;
pub const EXIT_CHECK: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_NUMERICAL: i32 = 3;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("check failed: {0}")]
    Check(String),
    #[error(transparent)]
    Numerical(#[from] sunc::Error),
    #[error("i/o: {0}")]
    Io(#[from] std::io::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) | CliError::Io(_) => EXIT_USAGE,
            CliError::Check(_) | CliError::Numerical(sunc::Error::BoundViolated { .. }) => EXIT_CHECK,
            CliError::Numerical(_) => EXIT_NUMERICAL,
        }
    }
}

/// Runs one resolved configuration on a pool of `cfg.threads` workers.
pub fn execute(cfg: &RunConfig) -> Result<Report, CliError> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.threads)
        .build()
        .map_err(|e| CliError::Usage(format!("thread pool: {e}")))?;
    let seed = || cfg.seed.ok_or_else(|| CliError::Usage("missing --seed".into()));
    pool.install(|| match cfg.command {
        CommandKind::Bounds => cmd_bounds(&cfg.dims, cfg.format),
        CommandKind::Verify => cmd_verify(seed()?, &cfg.dims, cfg.degree, cfg.count, &cfg.laws, cfg.quad_order, cfg.format),
        CommandKind::Optimize => cmd_optimize(&cfg.dims, cfg.degree, cfg.budget, cfg.restarts, seed()?, cfg.format),
        CommandKind::Lp => cmd_lp(&cfg.dims, cfg.degree, cfg.tol, cfg.format),
        CommandKind::Table => cmd_table(
            &cfg.dims,
            &cfg.lp_degrees,
            cfg.degree,
            cfg.budget,
            cfg.restarts,
            seed()?,
            cfg.tol,
            cfg.format,
        ),
    })
}

fn emit(cfg: &RunConfig, report: &Report) -> Result<(), CliError> {
    match &cfg.out {
        Some(path) => std::fs::write(path, &report.body)?,
        None => std::io::stdout().lock().write_all(report.body.as_bytes())?,
    }
    let mut err = std::io::stderr().lock();
    for f in &report.failures {
        writeln!(err, "{f}")?;
    }
    if !report.failures.is_empty() {
        return Err(CliError::Check(format!("{} item(s) failed; offenders written to stderr", report.failures.len())));
    }
    Ok(())
}

/// Parses `args`, runs, and returns the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let _ = e.print();
            return code;
        }
    };
    let outcome = RunConfig::resolve(cli.command, cli.flags).and_then(|cfg| {
        let report = execute(&cfg)?;
        emit(&cfg, &report)
    });
    match outcome {
        Ok(()) => EXIT_OK,
        Err(e) => {
            eprintln!("sunc: {e}");
            e.exit_code()
        }
    }
}
