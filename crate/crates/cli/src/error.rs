use std::path::PathBuf;

use thiserror::Error;

/// Process exit codes, one per error class.
pub mod exit {
    pub const OK: i32 = 0;
    pub const USAGE: i32 = 2;
    pub const IO: i32 = 3;
    pub const PARSE: i32 = 4;
    pub const INVALID_DATA: i32 = 5;
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),

    #[error(transparent)]
    Core(#[from] bandshift::Error),

    #[error("{path}: {source}")]
    Output {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        use bandshift::Error as E;
        match self {
            CliError::Usage(_) => exit::USAGE,
            CliError::Output { .. } => exit::IO,
            CliError::Core(e) => match e {
                E::Io { .. } => exit::IO,
                E::Raster { source: image::ImageError::IoError(_), .. } => exit::IO,
                E::Json { source, .. } if source.is_io() => exit::IO,
                E::Json { .. } | E::Tle(_) | E::SceneId { .. } | E::Raster { .. } => exit::PARSE,
                _ => exit::INVALID_DATA,
            },
        }
    }
}

pub type CliResult<T> = Result<T, CliError>;
