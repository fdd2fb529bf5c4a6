use std::fmt;

use ising_coupling::Error;

pub const EXIT_OK: u8 = 0;
/// Verification, parse or I/O failure.
pub const EXIT_FAILED: u8 = 1;
/// Solver stopped at its time limit with a valid incumbent.
pub const EXIT_TIMEOUT: u8 = 2;
pub const EXIT_USAGE: u8 = 3;

#[derive(Debug)]
pub struct Failure {
    pub code: u8,
    pub message: String,
}

impl Failure {
    pub fn failed(message: impl Into<String>) -> Self {
        Self {
            code: EXIT_FAILED,
            message: message.into(),
        }
    }

    pub fn usage(message: impl Into<String>) -> Self {
        Self {
            code: EXIT_USAGE,
            message: message.into(),
        }
    }

    pub fn io(path: &std::path::Path, err: std::io::Error) -> Self {
        Self::failed(format!("{}: {err}", path.display()))
    }

    /// Prefixes the message with the file it concerns.
    pub fn in_file(mut self, path: &std::path::Path) -> Self {
        self.message = format!("{}: {}", path.display(), self.message);
        self
    }
}

impl fmt::Display for Failure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.message)
    }
}

impl From<Error> for Failure {
    fn from(err: Error) -> Self {
        let code = match err {
            Error::InvalidArgument(_) | Error::TooLarge { .. } => EXIT_USAGE,
            _ => EXIT_FAILED,
        };
        Self {
            code,
            message: err.to_string(),
        }
    }
}

impl From<csv::Error> for Failure {
    fn from(err: csv::Error) -> Self {
        Self::failed(format!("csv: {err}"))
    }
}

pub type CliResult<T> = std::result::Result<T, Failure>;
