use thiserror::Error;

use crate::gp::SolveStatus;
use crate::model::NaiveBayes;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    Dimension { expected: usize, got: usize },

    #[error("feature index {index} out of range for {num_features} features")]
    IndexOutOfRange { index: usize, num_features: usize },

    #[error("domain error: {0}")]
    Domain(String),

    #[error("parameter {name} = {value} is at the probability boundary; weights would be infinite")]
    InfiniteWeight { name: String, value: f64 },

    #[error("{what} needs enumeration over 2^{size} states (limit 2^{limit})")]
    TooLarge {
        what: &'static str,
        size: usize,
        limit: usize,
    },

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("degenerate parameters: {0}")]
    Degenerate(String),

    #[error("empty dataset")]
    EmptyDataset,

    #[error("missing labels")]
    MissingLabels,

    #[error("solver stopped with status {status:?}")]
    Solver {
        status: SolveStatus,
        best: Option<Box<NaiveBayes>>,
    },

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    /// True for failures of the numerical machinery rather than of the input.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::Solver { .. } | Error::InfiniteWeight { .. } | Error::Degenerate(_)
        )
    }
}

pub(crate) fn check_len(expected: usize, got: usize) -> Result<()> {
    if expected == got {
        Ok(())
    } else {
        Err(Error::Dimension { expected, got })
    }
}
