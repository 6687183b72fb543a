use std::fmt;
use std::process::ExitCode;

use clap::Parser;

mod args;
mod commands;
mod job;
mod output;

pub const EXIT_OK: u8 = 0;
pub const EXIT_FAILURE: u8 = 1;
pub const EXIT_INVALID: u8 = 2;
pub const EXIT_UNDEFINED: u8 = 3;

#[derive(Debug)]
pub struct CliError {
    pub code: u8,
    pub message: String,
}

impl CliError {
    pub fn invalid(message: impl Into<String>) -> Self {
        Self { code: EXIT_INVALID, message: message.into() }
    }

    pub fn io(message: impl Into<String>) -> Self {
        Self { code: EXIT_FAILURE, message: message.into() }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.message)
    }
}

impl From<offdiag_core::Error> for CliError {
    fn from(e: offdiag_core::Error) -> Self {
        use offdiag_core::Error as E;
        let code = match e {
            E::InvalidParameter { .. } | E::InvalidDensityMatrix(_) | E::NotOrthonormal | E::EmptyChain => EXIT_INVALID,
            E::ZeroOverlap(_) => EXIT_UNDEFINED,
            E::Linalg(_) | E::NoSignChange => EXIT_FAILURE,
        };
        Self { code, message: e.to_string() }
    }
}

impl From<csv::Error> for CliError {
    fn from(e: csv::Error) -> Self {
        Self::io(e.to_string())
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        Self::io(e.to_string())
    }
}

fn main() -> ExitCode {
    let cli = args::Cli::parse();
    match commands::run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {}", e.message);
            ExitCode::from(e.code)
        }
    }
}
