use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),
    #[error(transparent)]
    Core(#[from] snlw_core::Error),
    #[error("i/o error on {path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
    #[error("manifest error: {0}")]
    Manifest(#[from] serde_json::Error),
    #[error("incomplete run: {0}")]
    Incomplete(String),
    #[error("{blowups} of {replicas} replicas blew up")]
    BlowupDominated { blowups: usize, replicas: usize },
    #[error("rerun differs from the recorded outputs: {0}")]
    Mismatch(String),
}

impl CliError {
    pub fn io(path: impl Into<PathBuf>) -> impl FnOnce(std::io::Error) -> CliError {
        let path = path.into();
        move |source| CliError::Io { path, source }
    }

    /// Process exit status: 2 for configuration errors, 3 when blowups
    /// dominate the ensemble, 1 otherwise.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Core(snlw_core::Error::InvalidArgument(_)) => 2,
            CliError::Core(snlw_core::Error::OrderOutOfRange { .. }) => 2,
            CliError::BlowupDominated { .. } => 3,
            _ => 1,
        }
    }
}
