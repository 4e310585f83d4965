//! Command-line driver: configuration, subcommands and JSON reports.

pub mod commands;
pub mod config;
pub mod report;

use std::fmt;
use std::time::Instant;

use rayon::prelude::*;

pub use commands::CommandKind;
pub use config::{Overrides, RunConfig, SystemKind};
pub use report::{Conventions, InstanceReport, Report};

/// Exit status 2 for `Invalid`, 1 for `Internal`.
#[derive(Debug)]
pub enum CliError {
    Invalid(String),
    Internal(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Invalid(_) => 2,
            CliError::Internal(_) => 1,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Invalid(m) => write!(f, "invalid input: {m}"),
            CliError::Internal(m) => write!(f, "internal error: {m}"),
        }
    }
}

impl std::error::Error for CliError {}

impl From<demuskin::Error> for CliError {
    fn from(e: demuskin::Error) -> Self {
        match e {
            demuskin::Error::InvalidInput(m) => CliError::Invalid(m),
            demuskin::Error::Internal(m) => CliError::Internal(m),
        }
    }
}

/// Runs `command` for every prime of the configuration; instances run in
/// parallel and are reported in sweep order.
pub fn run(command: CommandKind, cfg: &RunConfig) -> Result<Report, CliError> {
    cfg.validate()?;
    let start = Instant::now();
    let instances = cfg.primes().par_iter().map(|&p| command.run(cfg, p)).collect::<Result<Vec<_>, _>>()?;
    Ok(Report {
        command: command.name().to_string(),
        tool_version: env!("CARGO_PKG_VERSION").to_string(),
        config: cfg.clone(),
        conventions: Conventions::default(),
        notes: command.notes(),
        passed: instances.iter().all(|i| i.passed),
        instances,
        timing_ms: start.elapsed().as_secs_f64() * 1e3,
    })
}

/// Exit status for a finished report.
pub fn exit_code(report: &Report) -> i32 {
    if report.passed {
        0
    } else {
        1
    }
}
