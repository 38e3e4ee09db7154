use std::path::PathBuf;

use thiserror::Error;

/// Errors produced anywhere in the toolkit.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// More users in a cluster than the library can serve with disjoint caches.
    #[error("infeasible placement in cluster {cluster}: {users} users x {per_user} files exceeds library of {library} files")]
    InfeasiblePlacement {
        cluster: usize,
        users: usize,
        per_user: usize,
        library: usize,
    },

    #[error("degenerate geometry: transmitter {tx} and receiver {rx} are co-located")]
    DegenerateGeometry { tx: u32, rx: u32 },

    #[error("config error: {0}")]
    Config(String),

    #[error("unknown scenario `{name}` (available: {catalog})")]
    UnknownScenario { name: String, catalog: String },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}: malformed results file: {msg}")]
    Parse { path: PathBuf, msg: String },
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
