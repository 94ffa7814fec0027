//! Library side of the `bifbm` binary: configuration, commands, output.

pub mod commands;
pub mod config;
pub mod output;

use bifbm_core::BifbmError;
use thiserror::Error;

pub use commands::run;
pub use config::RunConfig;

#[derive(Debug, Error)]
pub enum CliError {
    #[error(transparent)]
    Core(#[from] BifbmError),
    #[error("invalid {param}: {reason}")]
    Config { param: &'static str, reason: String },
    #[error("i/o error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

impl CliError {
    /// 2 for domain or configuration problems, 3 for capacity, 4 for numeric failures.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Core(BifbmError::Domain { .. }) | CliError::Config { .. } | CliError::Io { .. } => 2,
            CliError::Core(BifbmError::Capacity { .. }) => 3,
            CliError::Core(BifbmError::Factorization { .. }) => 4,
            CliError::Csv(_) | CliError::Json(_) => 4,
        }
    }
}
