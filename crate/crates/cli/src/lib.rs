//! Experiment runner behind the `uptorus` binary.
//!
//! Everything the binary does is reachable as a library call: build an
//! [`spec::ExperimentSpec`], hand it to [`experiments::run`], and write the
//! resulting [`table::Table`] with the format of your choice. Identical spec
//! + seed + thread count produce byte-identical output.

pub mod diff;
pub mod experiments;
pub mod spec;
pub mod table;

use std::io::Write;

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// Exit codes used by the binary: 0 success, 1 table diff beyond tolerance,
/// 2 validation error, 3 compute budget exceeded.
#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("validation: {0}")]
    Validation(String),
    #[error("budget exceeded: {0}")]
    Budget(String),
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Validation(_) | CliError::Io(_) => 2,
            CliError::Budget(_) => 3,
        }
    }
}

impl From<uptorus::Error> for CliError {
    fn from(e: uptorus::Error) -> Self {
        match e {
            uptorus::Error::BudgetExceeded { .. } => CliError::Budget(e.to_string()),
            _ => CliError::Validation(e.to_string()),
        }
    }
}

/// Runs a spec and writes the table to `out`. Returns a one-line summary
/// suitable for stderr.
pub fn run_to_writer(spec: &spec::ExperimentSpec, out: &mut dyn Write) -> Result<String, CliError> {
    let table = experiments::run(spec)?;
    let echo = spec.canonical_echo();
    match spec.format {
        spec::OutputFormat::Csv => table.write_csv(out, VERSION, &echo)?,
        spec::OutputFormat::Json => table.write_json(out, VERSION, spec)?,
    }
    Ok(table.summary())
}
