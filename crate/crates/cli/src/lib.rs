//! Library side of the `gensync` binary, so the commands can be driven from
//! tests without spawning processes.

pub mod commands;
pub mod svg;

use gensync_core::Error as CoreError;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Config(CoreError),
    #[error("simulation failed: {0}")]
    Simulation(CoreError),
    #[error("{context}: {source}")]
    Io { context: String, source: std::io::Error },
    /// The command ran, but one of its checks did not hold.
    #[error("check failed: {0}")]
    Check(String),
}

impl CliError {
    /// 0 ok, 1 I/O, 2 configuration, 3 simulation, 4 failed check.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Io { .. } => 1,
            CliError::Config(_) => 2,
            CliError::Simulation(_) => 3,
            CliError::Check(_) => 4,
        }
    }
}

impl From<CoreError> for CliError {
    fn from(e: CoreError) -> Self {
        match e {
            CoreError::Io(source) => CliError::Io { context: "i/o".into(), source },
            e if e.is_config() => CliError::Config(e),
            e => CliError::Simulation(e),
        }
    }
}

pub type Result<T> = std::result::Result<T, CliError>;

pub(crate) fn io_err(context: impl Into<String>) -> impl FnOnce(std::io::Error) -> CliError {
    let context = context.into();
    move |source| CliError::Io { context, source }
}
