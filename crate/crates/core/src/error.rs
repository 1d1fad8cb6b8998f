use std::path::PathBuf;

/// Crate-wide error type.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// A text input could not be parsed. `line` is 1-based; 0 means the
    /// location is not line-addressable (e.g. an empty file).
    #[error("parse error in {path} at line {line}: {message}")]
    Parse {
        path: PathBuf,
        line: usize,
        message: String,
    },

    /// Bad configuration: missing column mapping, nonexistent path, invalid flag value.
    #[error("config error: {0}")]
    Config(String),

    /// An argument violated an operation's contract (dimension mismatch,
    /// out-of-range parameter, unresolvable concept).
    #[error("invalid input: {0}")]
    InvalidInput(String),

    /// The requested statistic is undefined on this input (constant vector,
    /// gold labels without positives, single-class leave-one-out).
    #[error("undefined statistic: {0}")]
    Degenerate(String),

    /// A numerical routine failed outright (non-finite values, rank-deficient
    /// base design).
    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn parse(path: impl Into<PathBuf>, line: usize, message: impl Into<String>) -> Self {
        Error::Parse {
            path: path.into(),
            line,
            message: message.into(),
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
