use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("format error{}: {message}", .context.as_ref().map(|c| format!(" in {c}")).unwrap_or_default())]
    Format {
        context: Option<String>,
        message: String,
    },

    #[error("invalid schema {db_id}: {message}")]
    Validation { db_id: String, message: String },

    #[error("record {index}: unknown database `{db_id}`")]
    UnknownDatabase { index: usize, db_id: String },

    #[error("grammar error at `{token}`: {message}")]
    Grammar { token: String, message: String },

    #[error("binding error: {0}")]
    Binding(String),

    #[error("database unavailable: {0}")]
    Unavailable(String),

    #[error("slot {slot_id}: {message}")]
    Context { slot_id: usize, message: String },

    #[error("gold query failed to execute on {db_id}: {message}")]
    Corpus { db_id: String, message: String },

    #[error("sqlite error: {0}")]
    Sqlite(#[from] rusqlite::Error),
}

impl Error {
    pub(crate) fn format(context: impl Into<Option<String>>, message: impl Into<String>) -> Self {
        Error::Format {
            context: context.into(),
            message: message.into(),
        }
    }

    pub(crate) fn grammar(token: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Grammar {
            token: token.into(),
            message: message.into(),
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
