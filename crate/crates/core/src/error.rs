use thiserror::Error;

/// Errors produced by the estimation and inference pipeline.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid data: {0}")]
    InvalidData(String),

    #[error("insufficient replication: groups {groups:?} have fewer than 2 observations")]
    InsufficientReplication { groups: Vec<usize> },

    #[error("domain error: {0}")]
    Domain(String),

    #[error("layout error: {0}")]
    Layout(String),

    #[error("invalid contrast: {0}")]
    InvalidContrast(String),

    #[error("degenerate: {0}")]
    Degenerate(String),

    #[error("internal consistency error: {0}")]
    Internal(String),

    #[error("{context}: {source}")]
    Context {
        context: String,
        #[source]
        source: Box<Error>,
    },

    #[error("csv: {0}")]
    Csv(#[from] csv::Error),

    #[error("io: {0}")]
    Io(#[from] std::io::Error),
}

impl Error {
    /// Wraps the error with a short description of where it happened.
    pub fn context(self, context: impl Into<String>) -> Self {
        Error::Context {
            context: context.into(),
            source: Box::new(self),
        }
    }

    /// Stable machine-readable tag for the innermost error.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::InvalidData(_) => "invalid-data",
            Error::InsufficientReplication { .. } => "insufficient-replication",
            Error::Domain(_) => "domain",
            Error::Layout(_) => "layout",
            Error::InvalidContrast(_) => "invalid-contrast",
            Error::Degenerate(_) => "degenerate",
            Error::Internal(_) => "internal",
            Error::Context { source, .. } => source.kind(),
            Error::Csv(_) => "csv",
            Error::Io(_) => "io",
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
