use std::path::{Path, PathBuf};

use foldgft_core::Error as CoreError;

/// Process exit status for each failure class.
pub mod exit {
    pub const SUCCESS: i32 = 0;
    pub const CHECK_FAILED: i32 = 1;
    pub const USAGE: i32 = 2;
    pub const NUMERICAL: i32 = 3;
}

#[derive(Debug, thiserror::Error)]
pub enum AppError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}: {source}")]
    Csv {
        path: PathBuf,
        #[source]
        source: csv::Error,
    },
    #[error("{path}: {message}")]
    Format { path: PathBuf, message: String },
    #[error(transparent)]
    Core(#[from] CoreError),
    #[error("{0} check(s) failed")]
    ChecksFailed(usize),
}

impl AppError {
    pub fn io(path: &Path, source: std::io::Error) -> Self {
        AppError::Io {
            path: path.to_path_buf(),
            source,
        }
    }

    pub fn csv(path: &Path, source: csv::Error) -> Self {
        AppError::Csv {
            path: path.to_path_buf(),
            source,
        }
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            AppError::ChecksFailed(_) => exit::CHECK_FAILED,
            AppError::Core(e) if is_numerical(e) => exit::NUMERICAL,
            _ => exit::USAGE,
        }
    }
}

/// Errors that come from the numerics rather than from bad input.
pub fn is_numerical(e: &CoreError) -> bool {
    matches!(
        e,
        CoreError::NotPositiveDefinite { .. }
            | CoreError::NoConvergence { .. }
            | CoreError::AccuracyContract { .. }
            | CoreError::FoldingViolated { .. }
            | CoreError::InadmissiblePartition { .. }
            | CoreError::EmptyBandlimitedSubspace
            | CoreError::UndefinedSnr
    )
}
