//! Reachable-set over-approximation with Lyapunov-type functions and
//! safety/optimality verification with time-indexed barrier certificates,
//! both compiled to DSOS linear programs over the belief simplex.

mod barrier;
mod certificate;
mod common;
mod reach;
mod validate;

pub use barrier::{
    barrier_program, certify_barrier_functions, overlap_mass, verify_optimality, verify_safety, BarrierCertificate, BarrierMode,
    BarrierProperty, InitialSet, UnsafeSet,
};
pub use certificate::{parse_certificate, write_certificate, Certificate};
pub use common::{AlternationOptions, CertifierOptions, Scope};
pub use reach::{reach_per_action, reach_policy, reach_program, reach_single, ReachCertificate, ReachCondition, ReachMode};
pub use validate::{validate_certificate, Evidence};

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CertError {
    /// The relaxation at this degree is infeasible. This is inconclusive, not
    /// a proof that the property fails.
    #[error("no certificate found at degree {degree}")]
    NotFound { degree: u32 },
    #[error("initial beliefs put mass {mass} on the unsafe states, above the threshold {lambda}")]
    Overlap { mass: f64, lambda: f64 },
    #[error("tube sums to {sum}, above the bound {gamma}")]
    TubeViolation { sum: f64, gamma: f64 },
    #[error("validation failed: {reason}{}", point.as_ref().map(|p| format!(" at {p:?}")).unwrap_or_default())]
    ValidationFailure { reason: String, point: Option<Vec<f64>> },
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("certificate line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error(transparent)]
    Psatz(#[from] psatz_compiler::PsatzError),
    #[error(transparent)]
    Lp(#[from] lp_core::LpError),
    #[error(transparent)]
    Pomdp(#[from] pomdp_core::PomdpError),
}

/// Tries degrees `1..=max_degree` in order and returns the first success.
pub fn escalate<T>(max_degree: u32, mut attempt: impl FnMut(u32) -> Result<T, CertError>) -> Result<T, CertError> {
    let mut last = CertError::NotFound { degree: 1 };
    for d in 1..=max_degree.max(1) {
        match attempt(d) {
            Ok(c) => return Ok(c),
            Err(e @ CertError::NotFound { .. }) => last = e,
            Err(e) => return Err(e),
        }
    }
    Err(last)
}
