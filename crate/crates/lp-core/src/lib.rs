//! Linear programs, a dense two-phase primal simplex solver, and MPS I/O.

mod mps;
mod program;
mod simplex;

pub use mps::{export_mps, import_mps, read_mps, write_mps};
pub use program::{Constraint, LinearProgram, Relation, VarKind};
pub use simplex::{solve, verify_farkas, LpSolution, PivotRule, SolveOptions, Status};

use thiserror::Error;

#[derive(Debug, Error)]
pub enum LpError {
    #[error("simplex stopped after {0} pivots without converging")]
    IterationLimit(usize),
    #[error("malformed program: {0}")]
    Malformed(String),
    #[error("MPS parse error on line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}
