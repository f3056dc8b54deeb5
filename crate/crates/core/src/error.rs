use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("vector has zero norm")]
    ZeroNorm,

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("non-finite value in vector")]
    NonFinite,

    #[error("invalid box: w={w}, h={h} (both must be > 0 and finite)")]
    InvalidBox { w: f64, h: f64 },

    #[error("score {0} outside [0, 1]")]
    InvalidScore(f64),

    #[error("invalid tracker config: {0}")]
    InvalidConfig(String),

    #[error("track history is empty")]
    EmptyHistory,

    #[error("sum of history scores is zero")]
    ZeroWeight,

    #[error("missing embedding for frame {frame}, detection {index}")]
    MissingEmbedding { frame: u32, index: usize },

    #[error("frame {got} is not after previously processed frame {previous}")]
    NonMonotonicFrame { previous: u32, got: u32 },

    #[error("line {line}: {reason}")]
    Parse { line: usize, reason: String },

    #[error("line {line}: duplicate entry for frame {frame}, identity {identity}")]
    DuplicateEntry {
        line: usize,
        frame: u32,
        identity: u32,
    },

    #[error("ground truth is empty")]
    EmptyGt,

    #[error("could not sample separated embeddings after {attempts} attempts")]
    SeparationInfeasible { attempts: usize },

    #[error("invalid scenario: {0}")]
    InvalidScenario(String),

    #[error("{}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub(crate) fn parse(line: usize, reason: impl Into<String>) -> Self {
        Error::Parse {
            line,
            reason: reason.into(),
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
