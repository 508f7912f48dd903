use std::io;
use std::path::{Path, PathBuf};

use contrafact_core::{CorpusError, SynthError};
use thiserror::Error;

/// Process exit codes.
pub mod exit {
    pub const OK: i32 = 0;
    pub const IO: i32 = 1;
    pub const VALIDATION: i32 = 2;
    pub const USAGE: i32 = 3;
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{}: {source}", path.display())]
    Io { path: PathBuf, source: io::Error },
    #[error("{}: {source}", path.display())]
    Corpus { path: PathBuf, source: CorpusError },
    #[error("{}: not valid UTF-8", path.display())]
    Encoding { path: PathBuf },
    #[error(transparent)]
    Synth(#[from] SynthError),
    #[error("{0}")]
    Usage(String),
}

impl CliError {
    pub fn io(path: &Path, source: io::Error) -> Self {
        Self::Io {
            path: path.to_owned(),
            source,
        }
    }

    pub fn corpus(path: &Path, source: CorpusError) -> Self {
        Self::Corpus {
            path: path.to_owned(),
            source,
        }
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            Self::Io { .. } => exit::IO,
            Self::Corpus { source, .. } if source.is_io() => exit::IO,
            Self::Corpus { .. } | Self::Encoding { .. } => exit::VALIDATION,
            Self::Synth(SynthError::Io(_)) => exit::IO,
            Self::Synth(SynthError::UnknownPreset(_)) => exit::USAGE,
            Self::Synth(_) => exit::VALIDATION,
            Self::Usage(_) => exit::USAGE,
        }
    }
}

pub type Result<T> = std::result::Result<T, CliError>;
