//! Command-line front end for `pricegap`.
//!
//! Exit codes: 0 success, 2 parse or argument error, 3 construction failure,
//! 4 invariant violation.

use std::ffi::OsString;
use std::io::Write;

use clap::Parser;
use thiserror::Error;

pub mod commands;
pub mod report;
pub mod sample;
pub mod spec;
pub mod verify;

pub use commands::{Cli, Command};
pub use report::{Format, ReportRecord};
pub use spec::{Built, InstanceSpec};

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Construction(String),
    #[error("invariant violated: {0}")]
    Invariant(String),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) | CliError::Io(_) => 2,
            CliError::Construction(_) => 3,
            CliError::Invariant(_) => 4,
        }
    }
}

impl From<pricegap::Error> for CliError {
    fn from(e: pricegap::Error) -> Self {
        match e {
            pricegap::Error::Construction { .. } => CliError::Construction(e.to_string()),
            other => CliError::Usage(other.to_string()),
        }
    }
}

impl From<csv::Error> for CliError {
    fn from(e: csv::Error) -> Self {
        match e.into_kind() {
            csv::ErrorKind::Io(io) => CliError::Io(io),
            other => CliError::Usage(format!("csv: {other:?}")),
        }
    }
}

/// Parses `args` and runs the subcommand; returns the process exit code.
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let text = e.render().to_string();
            let _ = if code == 0 { write!(stdout, "{text}") } else { write!(stderr, "{text}") };
            return code;
        }
    };
    let res = match &cli.command {
        Command::Generate(a) => commands::generate(a, stdout),
        Command::Analyze(a) => commands::analyze(a, stdout),
        Command::Sweep(a) => commands::sweep(a, stdout),
        Command::Verify(a) => commands::verify(a, stdout, stderr),
        Command::Screen(a) => commands::screen(a, stdout),
    };
    match res {
        Ok(()) => 0,
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            e.exit_code()
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exit_code_mapping() {
        let c = pricegap::Error::Construction { condition: "continuity", detail: String::new() };
        assert_eq!(CliError::from(c).exit_code(), 3);
        assert_eq!(CliError::from(pricegap::Error::InvalidArgument("x".into())).exit_code(), 2);
        assert_eq!(CliError::Invariant("x".into()).exit_code(), 4);
    }

    #[test]
    fn run_captures_output() {
        let (mut out, mut err) = (Vec::new(), Vec::new());
        assert_eq!(run(["pricegap", "generate", "staircase", "--k", "2"], &mut out, &mut err), 0);
        assert!(String::from_utf8(out).unwrap().contains("\"staircase\""));
        let (mut out, mut err) = (Vec::new(), Vec::new());
        assert_eq!(run(["pricegap", "generate", "staircase"], &mut out, &mut err), 2);
        assert!(String::from_utf8(err).unwrap().contains("needs parameter `k`"));
    }
}
