//! Sparse multivariate polynomials.
//!
//! Coefficients are `f64` for synthesis and [`num::BigRational`] for exact
//! checking. Terms are kept in a `BTreeMap` keyed by [`Monomial`], whose
//! ordering is graded lexicographic, so iteration order (and thus every
//! program assembled from a polynomial) is deterministic.

mod coeff;
mod monomial;
mod parse;
mod polynomial;
mod rational_map;

pub use coeff::Coeff;
pub use monomial::{monomial_basis, Monomial};
pub use parse::{parse_polynomial, ParseError};
pub use polynomial::{variables, PolyError, Polynomial, Variables};
pub use rational_map::{compose_cleared, compose_cleared_with_degree, RationalMap, RationalMapError};

/// Exact rational coefficient type used for validation.
pub type Rational = num::BigRational;

/// Converts a finite float to the exactly equal rational.
pub fn rational_from_f64(x: f64) -> Rational {
    Rational::from_float(x).expect("finite coefficient")
}
