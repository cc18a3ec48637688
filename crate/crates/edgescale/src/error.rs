use std::process::ExitCode;

/// Failure of a command before its gates are evaluated.
#[derive(Debug, thiserror::Error)]
pub enum RunError {
    #[error("config error: {0}")]
    Config(String),
    #[error("runtime error: {0}")]
    Runtime(String),
}

impl RunError {
    pub fn config(msg: impl Into<String>) -> Self {
        RunError::Config(msg.into())
    }

    pub fn exit_code(&self) -> ExitCode {
        match self {
            RunError::Config(_) => ExitCode::from(1),
            RunError::Runtime(_) => ExitCode::from(3),
        }
    }
}

impl From<edgescale_core::Error> for RunError {
    fn from(e: edgescale_core::Error) -> Self {
        match e {
            edgescale_core::Error::Config(msg) => RunError::Config(msg),
            other => RunError::Runtime(other.to_string()),
        }
    }
}

impl From<std::io::Error> for RunError {
    fn from(e: std::io::Error) -> Self {
        RunError::Runtime(e.to_string())
    }
}
