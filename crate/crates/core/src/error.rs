use std::path::PathBuf;

use thiserror::Error;

use crate::imaging::Band;
use crate::io::tle::TleError;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("band {0} is not part of the layout")]
    UnknownBand(String),

    #[error("layout is incomplete: {found} of 8 bands")]
    IncompleteLayout { found: usize },

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("scene is missing band {0}")]
    MissingBand(Band),

    #[error("{0} is out of range")]
    OutOfRange(String),

    #[error("altitude cannot be resolved: {0}")]
    Ambiguous(String),

    #[error(transparent)]
    Tle(#[from] TleError),

    #[error("malformed scene id {id:?}: {reason}")]
    SceneId { id: String, reason: String },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}: {source}")]
    Json {
        path: PathBuf,
        #[source]
        source: serde_json::Error,
    },

    #[error("{path}: {source}")]
    Raster {
        path: PathBuf,
        #[source]
        source: image::ImageError,
    },
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidParameter(msg.into())
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
