//! Problem and result files, instance generation and the golden suite.

pub mod expr;
mod gen;
mod json;
mod problem;
mod recheck;
mod run;
mod schema;
mod verify;

pub use gen::{digest, gen, GenSize, GEN_KINDS};
pub use json::{canonical, matrix, nums, parse_json, read_json, write_json};
pub use problem::{load, save, GridData, Problem, ProblemFile, VectorData, KINDS};
pub use recheck::recheck;
pub use run::{marginal_residual, run, Outcome, RunOptions, Status};
pub use schema::Field;
pub use verify::{groups, moment_flip, moment_grid, verify, ItemResult, ITEMS};

use crate::error::Error;

/// Process exit code for an error.
pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Infeasible(_) => 2,
        Error::NumericalBreakdown(_) => 4,
        Error::Schema { .. }
        | Error::Parse { .. }
        | Error::DimensionMismatch(_)
        | Error::InvalidInput(_)
        | Error::SizeGuard(_)
        | Error::Io(_) => 3,
    }
}
