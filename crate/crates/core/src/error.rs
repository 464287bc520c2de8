use std::path::PathBuf;

/// Errors produced anywhere in the crate.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("bad magic 0x{found:08x} at byte offset 0 (expected 0x{expected:08x})")]
    BadMagic { found: u32, expected: u32 },

    #[error("unsupported IDX element type 0x{code:02x} at byte offset 2 (only unsigned byte 0x08 is supported)")]
    UnsupportedElementType { code: u8 },

    #[error("truncated input at byte offset {offset}: {what}")]
    Truncated { offset: usize, what: String },

    #[error("dimension overflow at byte offset {offset}: {what}")]
    DimensionOverflow { offset: usize, what: String },

    #[error("csv line {line}, column {column}: {what}")]
    Csv {
        line: usize,
        column: usize,
        what: String,
    },

    #[error("shape mismatch: {0}")]
    Shape(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("non-finite values after update: {0}")]
    NonFinite(String),

    #[error("model too large for exact enumeration: {0}")]
    TooLarge(String),

    #[error("model file: {0}")]
    Format(String),

    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// True for failures caused by input data or files rather than by arguments.
    pub fn is_data_error(&self) -> bool {
        matches!(
            self,
            Error::Io { .. }
                | Error::BadMagic { .. }
                | Error::UnsupportedElementType { .. }
                | Error::Truncated { .. }
                | Error::DimensionOverflow { .. }
                | Error::Csv { .. }
                | Error::Format(_)
                | Error::Shape(_)
                | Error::NonFinite(_)
        )
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
