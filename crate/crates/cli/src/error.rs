use geu_core::{ErrorCategory, GeuError};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),
    #[error(transparent)]
    Core(#[from] GeuError),
    #[error("I/O error: {0}")]
    Io(#[from] std::io::Error),
}

impl CliError {
    /// 1 config, 2 data, 3 numerical failure.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 1,
            CliError::Io(_) => 2,
            CliError::Core(e) => match e.category() {
                ErrorCategory::Parameter => 1,
                ErrorCategory::Data => 2,
                ErrorCategory::Numerical => 3,
            },
        }
    }
}
