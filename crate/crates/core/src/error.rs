use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    /// An argument lies outside the domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// An exhaustive step would exceed the configured enumeration cap.
    #[error("{what}: universe size {n} exceeds the enumeration cap {cap} (set WAMLS_MAX_N to override)")]
    Resource { what: &'static str, n: usize, cap: usize },

    /// A product family would exceed the materialization limit.
    #[error("family would have {size} entries, above the limit of {cap}")]
    FamilyTooLarge { size: u128, cap: u128 },

    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    /// A numerical routine reached a state its derivation rules out.
    #[error("internal error: {0}")]
    Internal(String),
}

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub(crate) fn parse(line: usize, msg: impl Into<String>) -> Self {
        Error::Parse { line, msg: msg.into() }
    }

    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io { path: path.into(), source }
    }
}
