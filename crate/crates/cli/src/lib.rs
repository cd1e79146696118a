//! Command-line front end for nearest-subspace search: generate
//! synthetic sample sets, build and persist search indexes, run
//! single queries against saved indexes, and drive benchmark sweeps.
//!
//! The binary is `anss`; see `anss --help` for the command surface.
//! Everything the commands do is implemented in library form here so
//! the pieces (most importantly the [`index_file`] format) stay unit
//! testable.

use thiserror::Error;

pub mod args;
pub mod commands;
pub mod index_file;

/// Process-level failure, sorted by exit code.
///
/// | code | meaning |
/// |------|---------|
/// | 2    | unusable flags or parameters |
/// | 3    | file system / I/O failure |
/// | 4    | unusable data (malformed CSV, corrupt index, rank-deficient category) |
/// | 5    | valid pieces that do not fit together (measure vs. index, dimensions) |
#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Io(String),
    #[error("{0}")]
    Data(String),
    #[error("{0}")]
    Mismatch(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Io(_) => 3,
            CliError::Data(_) => 4,
            CliError::Mismatch(_) => 5,
        }
    }
}

impl From<anss_bench::DataError> for CliError {
    fn from(e: anss_bench::DataError) -> Self {
        use anss_bench::DataError::*;
        match e {
            InvalidParams(_) => CliError::Usage(e.to_string()),
            Io { .. } => CliError::Io(e.to_string()),
            Parse { .. } | InconsistentDimension { .. } | RankDeficient { .. } => {
                CliError::Data(e.to_string())
            }
        }
    }
}

impl From<anss_bench::BenchError> for CliError {
    fn from(e: anss_bench::BenchError) -> Self {
        use anss_bench::BenchError;
        use anss_core::baselines::BaselineError;
        use anss_core::engine::EngineError;
        use anss_core::grassmann::GrassmannError;
        match &e {
            BenchError::InvalidParams(_) => CliError::Usage(e.to_string()),
            BenchError::Grassmann(GrassmannError::DimensionMismatch(_))
            | BenchError::Engine(EngineError::DimensionMismatch(_))
            | BenchError::Baseline(BaselineError::DimensionMismatch(_)) => {
                CliError::Mismatch(e.to_string())
            }
            _ => CliError::Data(e.to_string()),
        }
    }
}

impl From<index_file::IndexFileError> for CliError {
    fn from(e: index_file::IndexFileError) -> Self {
        match &e {
            index_file::IndexFileError::Io { .. } => CliError::Io(e.to_string()),
            index_file::IndexFileError::Format(_) => CliError::Data(e.to_string()),
        }
    }
}
