use std::io;
use std::path::{Path, PathBuf};

use coherent_core::Error as CoreError;

use crate::format::FormatError;

/// Every failure a command can report, grouped by exit code.
#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Input(String),
    #[error("missing upstream artifact {}: run `{command}` first", path.display())]
    MissingArtifact { path: PathBuf, command: &'static str },
    #[error("{}: {source}", path.display())]
    Format { path: PathBuf, source: FormatError },
    #[error("{}: {source}", path.display())]
    Io { path: PathBuf, source: io::Error },
    #[error("numerical failure: {0}")]
    Numerical(CoreError),
    #[error(transparent)]
    Core(CoreError),
}

impl CliError {
    /// 2 for usage and input problems, 3 for divergence and other numerical failures.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Numerical(_) => 3,
            _ => 2,
        }
    }

    pub fn io(path: &Path) -> impl FnOnce(io::Error) -> CliError + '_ {
        move |source| CliError::Io {
            path: path.to_path_buf(),
            source,
        }
    }

    pub fn format(path: &Path) -> impl FnOnce(FormatError) -> CliError + '_ {
        move |source| CliError::Format {
            path: path.to_path_buf(),
            source,
        }
    }
}

impl From<CoreError> for CliError {
    fn from(e: CoreError) -> Self {
        match e {
            CoreError::NonFinite(_) | CoreError::Divergence { .. } | CoreError::NotConverged(_) => {
                CliError::Numerical(e)
            }
            other => CliError::Core(other),
        }
    }
}

pub type CliResult<T> = std::result::Result<T, CliError>;
