//! Positivity constraints on semialgebraic sets compiled to linear programs.
//!
//! A constraint `target >= margin * weight` on `{g_j >= 0}` is certified by
//! the identity `target - margin*weight = s0 + sum_j s_j g_j` with every `s`
//! a diagonally dominant sum of squares (DSOS). Coefficient matching turns
//! the identity into linear equalities over the Gram entries.

mod decision;
mod encode;
mod gram;
mod witness;

pub use decision::{DecisionPolynomial, LinExpr, LinPoly};
pub use encode::{
    assemble_program, encode_psatz, product_generators, simplex_generators, ConstraintHandle, PositivityConstraint, ProgramBuilder,
    PsatzOptions,
};
pub use gram::{dsos_relax, DsosForm, GramConstraint};
pub use witness::{check_identity, GramWitness, IdentityReport, PsatzWitness};

use thiserror::Error;

#[derive(Debug, Error)]
pub enum PsatzError {
    #[error("constraint `{label}`: target degree {target} exceeds the largest representable degree {reachable}")]
    DegreeMismatch { label: String, target: u32, reachable: u32 },
    #[error("constraint `{0}`: polynomials use different variable lists")]
    VariableMismatch(String),
    #[error(transparent)]
    Lp(#[from] lp_core::LpError),
}
