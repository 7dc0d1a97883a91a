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

    #[error("io error: {0}")]
    RawIo(#[from] std::io::Error),

    #[error("line {line}: {message}")]
    Ingest { line: usize, message: String },

    #[error("duplicate document ({title}, {index})")]
    DuplicateDoc { title: String, index: u32 },

    #[error("invalid {kind} file: {message}")]
    Format { kind: &'static str, message: String },

    #[error("annotation error: {0}")]
    Annotation(String),

    #[error("invalid input: {0}")]
    Input(String),

    #[error("no keywords could be extracted")]
    NoKeywords,

    #[error("training diverged at epoch {epoch}: loss {loss}; lower the learning rate")]
    Diverged { epoch: usize, loss: f64 },

    #[error("missing predictions for claim ids {0:?}")]
    MissingPredictions(Vec<u64>),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("claim {id}: {source}")]
    Claim {
        id: u64,
        #[source]
        source: Box<Error>,
    },
}

impl Error {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub fn format(kind: &'static str, message: impl Into<String>) -> Self {
        Error::Format {
            kind,
            message: message.into(),
        }
    }
}
