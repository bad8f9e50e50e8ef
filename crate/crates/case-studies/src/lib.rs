//! Model builders for two case studies, ad scheduling under unobserved user
//! interest and a learner moving on a lattice of hypotheses, plus a random
//! family of models with a provably safe structure.

mod absorbing;
mod ad;
mod lattice;

use pomdp_core::PomdpError;
use thiserror::Error;

pub use absorbing::{random_absorbing_safe, AbsorbingSafeModel};
pub use ad::{ad_policy, build_ad_pomdp, poisson_cdf, AdInitial, AdSchedulingSpec};
pub use lattice::{build_lattice_pomdp, LatticeTeachingSpec};

#[derive(Debug, Error)]
pub enum CaseStudyError {
    #[error("invalid specification: {0}")]
    InvalidSpec(String),
    #[error(transparent)]
    Model(#[from] PomdpError),
}
