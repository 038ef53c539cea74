use std::path::PathBuf;

use serde::Serialize;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("cannot read {path}: {source}")]
    Read { path: PathBuf, source: std::io::Error },

    #[error("cannot write {path}: {source}")]
    Write { path: PathBuf, source: std::io::Error },

    #[error("invalid config at line {line}, column {column}: {message}")]
    Schema { line: usize, column: usize, message: String },

    #[error("invalid config: {0}")]
    Config(String),

    #[error(transparent)]
    Model(#[from] bittery::Error),

    #[error("csv output failed: {0}")]
    Csv(#[from] csv::Error),

    #[error("{0}")]
    Failed(String),
}

#[derive(Serialize)]
struct Envelope<'a> {
    error: Body<'a>,
}

#[derive(Serialize)]
struct Body<'a> {
    kind: &'a str,
    message: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    line: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    column: Option<usize>,
}

impl CliError {
    pub fn kind(&self) -> &'static str {
        match self {
            CliError::Read { .. } | CliError::Write { .. } => "io",
            CliError::Schema { .. } => "schema",
            CliError::Config(_) => "config",
            CliError::Model(_) => "model",
            CliError::Csv(_) => "output",
            CliError::Failed(_) => "verification",
        }
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Schema { .. } | CliError::Config(_) => 2,
            _ => 1,
        }
    }

    /// One-line JSON rendering for stderr.
    pub fn to_json(&self) -> String {
        let (line, column) = match self {
            CliError::Schema { line, column, .. } => (Some(*line), Some(*column)),
            _ => (None, None),
        };
        let envelope = Envelope { error: Body { kind: self.kind(), message: self.to_string(), line, column } };
        serde_json::to_string(&envelope).unwrap_or_else(|_| format!("{{\"error\":{{\"kind\":\"{}\"}}}}", self.kind()))
    }
}

impl From<serde_json::Error> for CliError {
    fn from(e: serde_json::Error) -> Self {
        CliError::Schema { line: e.line(), column: e.column(), message: e.to_string() }
    }
}

pub type CliResult<T> = Result<T, CliError>;
