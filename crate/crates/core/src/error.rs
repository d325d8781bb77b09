use std::path::PathBuf;

use thiserror::Error;

use crate::recovery::DecodeResult;
use crate::sdp::SolverStatus;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("unknown modulation `{0}`")]
    UnknownModulation(String),

    #[error("constellation needs at least two points, got {0}")]
    TooFewPoints(usize),

    #[error("constellation points must be finite and strictly increasing")]
    UnorderedPoints,

    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("row {row} of the assignment matrix is not a unit vector")]
    RowSum { row: usize },

    #[error("exhaustive search over {candidates} candidates exceeds the cap of {cap}")]
    EnumerationCap { candidates: u128, cap: u128 },

    #[error("channel matrix is rank deficient")]
    RankDeficient,

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("SDP solve ended with status {status:?}")]
    SolverFailed {
        status: SolverStatus,
        /// Hard decision rounded from the last iterate.
        fallback: Box<DecodeResult>,
    },

    #[error("SDPA parse error on line {line}: {msg}")]
    SdpaParse { line: usize, msg: String },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub(crate) fn dim(msg: impl Into<String>) -> Self {
        Error::Dimension(msg.into())
    }

    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
