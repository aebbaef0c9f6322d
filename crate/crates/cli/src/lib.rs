//! `tbell`: evaluate scenario files, search for Bell-value optima and run
//! the verification suites.
//!
//! Exit codes: 0 success, 1 input error, 2 verification failure.

use std::ffi::OsString;

use clap::error::ErrorKind;
use clap::Parser;

pub mod cli;
pub mod commands;
pub mod io;
pub mod report;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Input(String),
    #[error(transparent)]
    Core(#[from] tbell_core::Error),
}

/// Captured result of one invocation.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Output {
    pub stdout: String,
    pub stderr: String,
    pub code: u8,
}

pub const EXIT_OK: u8 = 0;
pub const EXIT_INPUT: u8 = 1;
pub const EXIT_VERIFICATION: u8 = 2;

pub fn run<I, T>(args: I) -> Output
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let parsed = match cli::Cli::try_parse_from(args) {
        Ok(p) => p,
        Err(e) => {
            let text = e.render().to_string();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => Output { stdout: text, stderr: String::new(), code: EXIT_OK },
                _ => Output { stdout: String::new(), stderr: text, code: EXIT_INPUT },
            };
        }
    };
    match commands::execute(&parsed.command) {
        Ok(r) if r.failures.is_empty() => Output { stdout: r.body, stderr: String::new(), code: EXIT_OK },
        Ok(r) => {
            let stderr = r.failures.iter().map(|f| format!("FAIL {f}\n")).collect();
            Output { stdout: r.body, stderr, code: EXIT_VERIFICATION }
        }
        Err(e) => Output { stdout: String::new(), stderr: format!("error: {e}\n"), code: EXIT_INPUT },
    }
}
