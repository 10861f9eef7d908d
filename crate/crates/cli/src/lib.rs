//! Library side of the `msv` tool: configuration and the subcommands,
//! usable without going through argument parsing.

pub mod commands;
pub mod config;

pub use commands::{
    cmd_decode, cmd_encode, cmd_evaluate, cmd_report, cmd_synth, CorpusReport, VideoRecord,
};
pub use config::{Overrides, PipelineConfig};

/// Failures split by exit status: bad invocation versus bad data.
#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Data(#[from] msv_core::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 1,
            CliError::Data(_) => 2,
        }
    }
}
