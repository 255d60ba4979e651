use serde_json::{json, Value};
use thiserror::Error;

/// Failures that end a run, each with a stable exit code.
#[derive(Debug, Error)]
pub enum CliError {
    /// A check ran and did not pass; the report is already written.
    #[error("check failed")]
    CheckFailed,

    #[error("configuration error: {0}")]
    Config(String),

    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error("cannot write output: {0}")]
    Io(#[from] std::io::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::CheckFailed => 1,
            CliError::Config(_) | CliError::Io(_) => 2,
            CliError::Numerical(_) => 3,
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            CliError::CheckFailed => "check_failed",
            CliError::Config(_) => "config",
            CliError::Numerical(_) => "numerical",
            CliError::Io(_) => "io",
        }
    }

    pub fn report(&self, command: &str) -> Value {
        json!({
            "command": command,
            "status": "error",
            "error": {
                "kind": self.kind(),
                "exit_code": self.exit_code(),
                "message": self.to_string(),
            }
        })
    }
}

impl From<qims::Error> for CliError {
    fn from(e: qims::Error) -> Self {
        if e.is_numerical() {
            CliError::Numerical(e.to_string())
        } else {
            CliError::Config(e.to_string())
        }
    }
}
