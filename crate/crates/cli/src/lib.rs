//! Command-line driver: configuration, experiment orchestration and file
//! output for the condensate/mirror state-transfer simulator.

pub mod commands;
pub mod config;
pub mod oracle;
pub mod pipeline;
pub mod sweep;

use std::fmt;

use serde::Serialize;

pub use config::{parse_config, ConfigError, RunConfig};

pub const EXIT_OK: u8 = 0;
pub const EXIT_CONFIG: u8 = 1;
pub const EXIT_NUMERICAL: u8 = 2;

/// A failed run: what went wrong and which exit code it maps to.
#[derive(Debug, Clone, Serialize)]
pub struct Failure {
    #[serde(skip)]
    pub code: u8,
    pub kind: &'static str,
    pub message: String,
}

impl Failure {
    pub fn config(message: impl Into<String>) -> Self {
        Failure { code: EXIT_CONFIG, kind: "config", message: message.into() }
    }

    pub fn numerical(kind: &'static str, message: impl Into<String>) -> Self {
        Failure { code: EXIT_NUMERICAL, kind, message: message.into() }
    }
}

impl fmt::Display for Failure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} error: {}", self.kind, self.message)
    }
}

impl From<ConfigError> for Failure {
    fn from(e: ConfigError) -> Self {
        Failure::config(e.to_string())
    }
}

impl From<qst_core::Error> for Failure {
    fn from(e: qst_core::Error) -> Self {
        use qst_core::Error as E;
        let kind = match &e {
            E::Input(_) => return Failure { code: EXIT_CONFIG, kind: "input", message: e.to_string() },
            E::SteadyState { .. } | E::Bracketing { .. } => "convergence",
            E::BlowUp { .. } | E::StepUnderflow { .. } | E::StepTooLarge { .. } => "integration",
            E::Size { .. } | E::Truncation(_) => "size",
            E::Unstable { .. } => "unstable",
            E::NotPsd { .. } | E::GridMismatch(_) | E::KernelTooWide { .. } => "numerical",
        };
        Failure::numerical(kind, e.to_string())
    }
}
