use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("io error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("json error in {context}: {source}")]
    Json {
        context: String,
        #[source]
        source: serde_json::Error,
    },
    #[error("config: {0}")]
    Config(String),
    #[error("video {path}: {message}")]
    Video { path: PathBuf, message: String },
    #[error("provider {kind}: {message}")]
    Provider { kind: String, message: String },
    #[error("provider {kind}: transient failure: {message}")]
    Transient { kind: String, message: String },
    #[error("no JSON value found in model output: {0:?}")]
    Extraction(String),
    #[error("suite: {0}")]
    Suite(String),
    #[error("sample {sample}: {source}")]
    Sample {
        sample: String,
        #[source]
        source: Box<Error>,
    },
    #[error("usage: {0}")]
    Usage(String),
    #[error(transparent)]
    Core(#[from] locot2v_core::Error),
}

impl Error {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub fn json(context: impl Into<String>, source: serde_json::Error) -> Self {
        Error::Json {
            context: context.into(),
            source,
        }
    }

    pub fn provider(kind: impl std::fmt::Display, message: impl Into<String>) -> Self {
        Error::Provider {
            kind: kind.to_string(),
            message: message.into(),
        }
    }

    pub fn for_sample(self, sample: &str) -> Self {
        match self {
            e @ Error::Sample { .. } => e,
            e => Error::Sample {
                sample: sample.to_string(),
                source: Box::new(e),
            },
        }
    }

    /// Errors worth another attempt.
    pub fn is_retryable(&self) -> bool {
        matches!(
            self,
            Error::Transient { .. } | Error::Extraction(_) | Error::Provider { .. }
        )
    }
}
