use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("ingestion failed for repository `{repo}`: {message}")]
    Ingest { repo: String, message: String },

    #[error("undefined metric: {0}")]
    UndefinedMetric(String),

    #[error("inference error: {0}")]
    Inference(String),

    #[error("lexicon {path}:{line}: {message}")]
    Lexicon { path: String, line: usize, message: String },

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("stage `{stage}` failed on {record}: {source}")]
    Stage {
        stage: &'static str,
        record: String,
        #[source]
        source: Box<Error>,
    },

    #[error("malformed record at {path}:{line}: {message}")]
    Record {
        path: PathBuf,
        line: usize,
        message: String,
    },

    #[error("I/O error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn in_stage(self, stage: &'static str, record: impl Into<String>) -> Self {
        Error::Stage {
            stage,
            record: record.into(),
            source: Box::new(self),
        }
    }
}
