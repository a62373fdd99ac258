use std::path::PathBuf;

use thiserror::Error;

/// Failures of a command, each mapped to a process exit code.
#[derive(Debug, Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),
    #[error("cannot access {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("domain error: {0}")]
    Domain(nlod_core::Error),
    #[error("kernel fault: {0}")]
    Kernel(nlod_core::Error),
}

impl CliError {
    pub const CONFIG: u8 = 2;
    pub const DOMAIN: u8 = 3;
    pub const KERNEL: u8 = 4;

    pub fn exit_code(&self) -> u8 {
        match self {
            Self::Config(_) | Self::Io { .. } => Self::CONFIG,
            Self::Domain(_) => Self::DOMAIN,
            Self::Kernel(_) => Self::KERNEL,
        }
    }
}

impl From<nlod_core::Error> for CliError {
    fn from(e: nlod_core::Error) -> Self {
        use nlod_core::Error as E;
        match e {
            E::EvalFault { .. } => Self::Kernel(e),
            E::Syntax { .. } | E::UnknownIdentifier { .. } => Self::Config(e.to_string()),
            E::Domain(_) | E::NonConvergence(_) => Self::Domain(e),
        }
    }
}
