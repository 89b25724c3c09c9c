//! `bilateral`: efficiency tables, protocol simulations, and the
//! forward-vs-bilateral comparison, as CSV or JSON.
//!
//! Exit codes: 0 success, 2 usage or invalid input, 3 internal logic error,
//! 4 I/O error.

mod args;
mod commands;
mod report;

use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::Parser;

use args::{Cli, Command, Format};
use report::Document;

#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Core(bilateral_core::Error),
    Io(PathBuf, io::Error),
}

impl From<bilateral_core::Error> for CliError {
    fn from(e: bilateral_core::Error) -> Self {
        CliError::Core(e)
    }
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Core(e) if e.is_user_error() => 2,
            CliError::Core(_) => 3,
            CliError::Io(..) => 4,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Usage(msg) => write!(f, "usage error: {msg}"),
            CliError::Core(e) => write!(f, "{e}"),
            CliError::Io(path, e) => write!(f, "I/O error on {}: {e}", path.display()),
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(2)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    match execute(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("bilateral: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}

fn execute(cli: &Cli) -> Result<(), CliError> {
    let (document, trace) = match &cli.command {
        Command::Render { input } => {
            if let Some(flag) = cli.opts.given().first() {
                return Err(CliError::Usage(format!("render does not use {flag}")));
            }
            (read_document(input)?, None)
        }
        command => {
            let outcome = commands::run(command, &cli.opts)?;
            (outcome.document, outcome.trace)
        }
    };
    if let Some(trace) = trace {
        io::stderr()
            .write_all(trace.as_bytes())
            .map_err(|e| CliError::Io("<stderr>".into(), e))?;
    }
    let format = cli.opts.format.unwrap_or(match document {
        Document::Table1 { .. } | Document::Compare { .. } => Format::Csv,
        _ => Format::Json,
    });
    let text = match format {
        Format::Csv => document.to_csv(),
        Format::Json => document.to_json(),
    };
    match &cli.opts.out {
        Some(path) => fs::write(path, text).map_err(|e| CliError::Io(path.clone(), e)),
        None => io::stdout()
            .write_all(text.as_bytes())
            .map_err(|e| CliError::Io("<stdout>".into(), e)),
    }
}

fn read_document(path: &Path) -> Result<Document, CliError> {
    let text = fs::read_to_string(path).map_err(|e| CliError::Io(path.to_path_buf(), e))?;
    serde_json::from_str(&text)
        .map_err(|e| CliError::Usage(format!("{} is not a report: {e}", path.display())))
}
