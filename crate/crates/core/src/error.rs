use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("success probability {0} is outside (0, 1]")]
    InvalidProbability(f64),

    #[error("invalid game: {0}")]
    InvalidGame(String),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("communication graph union over every window of {period} iterations is not connected ({topology})")]
    Disconnected { topology: String, period: usize },

    #[error("reachable state set exceeds the cap of {cap} states")]
    ReachableSetTooLarge { cap: usize },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}:{line}: {message}")]
    Parse {
        path: PathBuf,
        line: usize,
        message: String,
    },

    #[error("unknown figure `{0}` (expected fig2, fig3 or fig4)")]
    UnknownFigure(String),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
