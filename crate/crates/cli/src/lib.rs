//! File formats, run manifests and plot emission behind the `mlnoise`
//! command-line tool.

pub mod formats;
pub mod manifest;
pub mod svg;

use std::fmt;

/// Exit status when validation finds a failing check or a computation fails.
pub const EXIT_FAILED: u8 = 1;
/// Exit status for arguments outside their domain.
pub const EXIT_USAGE: u8 = 2;
/// Exit status when no embedding length up to the cap is non-negative definite.
pub const EXIT_NO_LENGTH: u8 = 3;
/// Exit status for unreadable or malformed input files.
pub const EXIT_INPUT: u8 = 4;

/// A command failure carrying its process exit status.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Failure {
    pub code: u8,
    pub message: String,
}

impl Failure {
    pub fn new(code: u8, message: impl Into<String>) -> Self {
        Self {
            code,
            message: message.into(),
        }
    }

    pub fn usage(message: impl Into<String>) -> Self {
        Self::new(EXIT_USAGE, message)
    }

    pub fn io(context: &str, err: std::io::Error) -> Self {
        Self::new(EXIT_FAILED, format!("{context}: {err}"))
    }
}

impl fmt::Display for Failure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.message)
    }
}

impl std::error::Error for Failure {}

impl From<mlnoise::Error> for Failure {
    fn from(err: mlnoise::Error) -> Self {
        use mlnoise::Error as E;
        let code = match err {
            E::Domain { .. } | E::InvalidArgument(_) | E::NotPowerOfTwo(_) => EXIT_USAGE,
            E::NoValidLength { .. } => EXIT_NO_LENGTH,
            E::Convergence { .. } | E::Quadrature(_) => EXIT_FAILED,
        };
        Self::new(code, err.to_string())
    }
}

impl From<formats::MalformedInput> for Failure {
    fn from(err: formats::MalformedInput) -> Self {
        Self::new(EXIT_INPUT, err.to_string())
    }
}
