use std::io;
use std::path::PathBuf;

use modal_update::Error as CoreError;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error(transparent)]
    Core(#[from] CoreError),
    #[error("cannot read {path}: {source}")]
    Read { path: PathBuf, source: io::Error },
    #[error("cannot write output: {0}")]
    Write(#[from] io::Error),
    #[error("{0}")]
    Usage(String),
}

impl CliError {
    pub fn read(path: impl Into<PathBuf>, source: io::Error) -> Self {
        CliError::Read { path: path.into(), source }
    }

    /// 2: bad input or missing files, 3: finite-element failure,
    /// 4: nothing survived pre-screening, 1: anything else.
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Core(e) => match e {
                CoreError::InvalidConfig(_)
                | CoreError::InvalidMeasurement(_)
                | CoreError::InvalidSensor(_)
                | CoreError::OutOfBox { .. } => 2,
                CoreError::InvalidModel(_)
                | CoreError::SingularMass
                | CoreError::EigenFailure(_)
                | CoreError::DegenerateShape(_)
                | CoreError::EvaluationFailure(_) => 3,
                CoreError::EmptyScreen => 4,
                CoreError::EmptyHistogram => 1,
            },
            CliError::Read { .. } | CliError::Usage(_) => 2,
            CliError::Write(_) => 1,
        }
    }
}

pub type CliResult<T> = std::result::Result<T, CliError>;
