use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum ExpError {
    #[error("parse error{}: {message}", line.map(|l| format!(" at line {l}")).unwrap_or_default())]
    Parse { line: Option<usize>, message: String },
    #[error("invalid `{key}`: {message}")]
    Invalid { key: String, message: String },
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("mismatched runs: {0}")]
    MismatchedRuns(String),
    #[error(transparent)]
    Core(#[from] sgim_core::Error),
    #[error(transparent)]
    Star(#[from] sgim_star::Error),
}

impl ExpError {
    /// Process exit code: 1 for configuration problems, 2 for runtime errors.
    pub fn exit_code(&self) -> i32 {
        match self {
            ExpError::Parse { .. } | ExpError::Invalid { .. } => 1,
            _ => 2,
        }
    }

    /// Message with the offending line resolved against `source`.
    pub fn describe(&self, source: Option<&str>) -> String {
        match (self, source) {
            (ExpError::Invalid { key, message }, Some(src)) => match crate::config::locate(src, key) {
                Some(line) => format!("line {line}: invalid `{key}`: {message}"),
                None => self.to_string(),
            },
            _ => self.to_string(),
        }
    }
}

pub fn io_err(path: impl Into<PathBuf>) -> impl FnOnce(std::io::Error) -> ExpError {
    let path = path.into();
    move |source| ExpError::Io { path, source }
}
