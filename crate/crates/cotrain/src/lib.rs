//! Everything around the protocol core that needs an operating system:
//! transports, the dealer's files, datasets, metrics and the CLI.

use std::io;
use std::path::{Path, PathBuf};

use cotrain_core::admm::AdmmError;
use cotrain_core::protocol::ProtocolError;

pub mod baseline;
pub mod cli;
pub mod config;
pub mod data;
pub mod dealer;
pub mod metrics;
pub mod run;
pub mod script;
pub mod transport;

#[derive(Debug, thiserror::Error)]
pub enum HarnessError {
    #[error("{}: {source}", path.display())]
    Io { path: PathBuf, source: io::Error },
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
    #[error("data: {0}")]
    Data(String),
    #[error("config: {0}")]
    Config(String),
    #[error("network: {0}")]
    Net(String),
    #[error(transparent)]
    Admm(#[from] AdmmError),
    #[error(transparent)]
    Protocol(#[from] ProtocolError),
}

impl HarnessError {
    pub fn io(path: &Path, source: io::Error) -> Self {
        Self::Io { path: path.to_path_buf(), source }
    }
}
