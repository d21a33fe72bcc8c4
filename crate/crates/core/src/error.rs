use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid level count {q}: {reason}")]
    InvalidLevel { q: i64, reason: &'static str },

    #[error("invalid generators: {0}")]
    InvalidGenerators(String),

    #[error("shape mismatch: {0}")]
    Shape(String),

    #[error("{what} = {value} is out of range {lo}..={hi}")]
    OutOfRange {
        what: &'static str,
        value: i64,
        lo: i64,
        hi: i64,
    },

    #[error("run count q^(n-m) = {runs} exceeds the cap of {cap} rows")]
    RunCap { runs: u128, cap: u64 },

    #[error("search over {size} candidates exceeds the cap of {cap}; rerun with the cap raised")]
    SearchCap { size: u128, cap: u64 },

    #[error("information matrix is singular (pivot {pivot:.3e} in column {column}); the model is not estimable on this design")]
    Singular { column: usize, pivot: f64 },

    #[error("unsupported input: {0}")]
    Unsupported(String),

    #[error("unknown table id `{0}`")]
    UnknownTable(String),

    #[error("{source_name}:{line}: {msg}")]
    Parse {
        source_name: String,
        line: usize,
        msg: String,
    },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub(crate) fn parse(source_name: impl Into<String>, line: usize, msg: impl Into<String>) -> Self {
        Error::Parse {
            source_name: source_name.into(),
            line,
            msg: msg.into(),
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// True for errors caused by mathematically invalid input (bad level
    /// count, generators, singular model) as opposed to usage or I/O faults.
    pub fn is_invalid_input(&self) -> bool {
        matches!(
            self,
            Error::InvalidLevel { .. }
                | Error::InvalidGenerators(_)
                | Error::Singular { .. }
                | Error::Parse { .. }
                | Error::Shape(_)
        )
    }
}
