use serde::{Deserialize, Serialize};
use serde_json::json;
use std::fmt;

/// Pipeline stage a numerical failure is attributed to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Stage {
    Setup,
    Eigen,
    Extension,
    Minimize,
    Sweep,
    MoveBoundary,
    Constants,
    Pohozaev,
    Output,
}

impl fmt::Display for Stage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = serde_json::to_value(self).ok().and_then(|v| v.as_str().map(str::to_owned)).unwrap_or_default();
        f.write_str(&s)
    }
}

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("invalid configuration: {message}")]
    Config { message: String, keys: Vec<String> },

    #[error("{stage} failed: {source}")]
    Numerical {
        stage: Stage,
        #[source]
        source: fraclap_core::Error,
    },

    #[error("cannot access {path}: {message}")]
    Io { path: String, message: String },

    #[error("cannot write report: {0}")]
    Output(String),

    #[error("plot data: {0}")]
    Plot(String),
}

impl CliError {
    pub fn config(message: impl Into<String>) -> Self {
        CliError::Config { message: message.into(), keys: Vec::new() }
    }

    pub fn io(path: &std::path::Path, e: impl fmt::Display) -> Self {
        CliError::Io { path: path.display().to_string(), message: e.to_string() }
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config { .. } => 2,
            _ => 1,
        }
    }

    /// Machine-readable form printed on failure.
    pub fn to_json(&self) -> serde_json::Value {
        let body = match self {
            CliError::Config { message, keys } => json!({ "kind": "config", "message": message, "keys": keys }),
            CliError::Numerical { stage, source } => json!({ "kind": "numerical", "stage": stage, "message": source.to_string() }),
            CliError::Io { path, message } => json!({ "kind": "io", "path": path, "message": message }),
            CliError::Output(m) => json!({ "kind": "output", "message": m }),
            CliError::Plot(m) => json!({ "kind": "plot", "message": m }),
        };
        json!({ "error": body })
    }
}

pub type Result<T> = std::result::Result<T, CliError>;

/// Tags core errors with the stage they came from.
pub trait AtStage<T> {
    fn at(self, stage: Stage) -> Result<T>;
}

impl<T> AtStage<T> for fraclap_core::Result<T> {
    fn at(self, stage: Stage) -> Result<T> {
        self.map_err(|source| CliError::Numerical { stage, source })
    }
}
