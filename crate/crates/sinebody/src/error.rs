use std::path::PathBuf;

/// Errors raised while loading inputs, running checks and writing outputs.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("{path}: {source}")]
    Json {
        path: String,
        #[source]
        source: serde_json::Error,
    },

    #[error("{path}: field `{field}`: {reason}")]
    Descriptor {
        path: String,
        field: String,
        reason: String,
    },

    #[error("{path}: {reason}")]
    Config { path: String, reason: String },

    #[error("cannot read {}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("unknown body {0:?}; expected a descriptor file or a built-in name")]
    UnknownBody(String),

    #[error("invalid option: {0}")]
    Usage(String),

    #[error(transparent)]
    Core(#[from] sinebody_core::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Write(#[from] std::io::Error),
}

impl Error {
    /// Whether the error stems from malformed input rather than a failed
    /// computation.
    pub fn is_input_error(&self) -> bool {
        matches!(
            self,
            Error::Json { .. }
                | Error::Descriptor { .. }
                | Error::Config { .. }
                | Error::Io { .. }
                | Error::UnknownBody(_)
                | Error::Usage(_)
        )
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
