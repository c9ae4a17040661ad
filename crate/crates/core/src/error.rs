use thiserror::Error;

use crate::lp::FarkasCert;

/// Errors reported by solvers, readers and the command line front end.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("numerical breakdown: {0}")]
    NumericalBreakdown(String),

    #[error("infeasible problem (certificate margin {:.3e})", .0.margin)]
    Infeasible(Box<FarkasCert>),

    #[error("size guard exceeded: {0}")]
    SizeGuard(String),

    #[error("schema error at `{path}`: {msg}")]
    Schema { path: String, msg: String },

    #[error("parse error at line {line}, column {column}: {msg}")]
    Parse {
        line: usize,
        column: usize,
        msg: String,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn dim(msg: impl Into<String>) -> Self {
        Error::DimensionMismatch(msg.into())
    }

    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidInput(msg.into())
    }

    pub(crate) fn schema(path: impl Into<String>, msg: impl Into<String>) -> Self {
        Error::Schema {
            path: path.into(),
            msg: msg.into(),
        }
    }
}
