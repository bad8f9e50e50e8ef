use num::BigRational;
use thiserror::Error;

use crate::{Coeff, Monomial, Polynomial, Variables};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum RationalMapError {
    #[error("numerators and denominator must share one variable list")]
    VariableMismatch,
    #[error("denominator is identically zero")]
    ZeroDenominator,
    #[error("denominator is {value} < 0 at simplex point {point:?}")]
    NegativeDenominator { point: Vec<f64>, value: f64 },
}

/// `x -> M(x) / N(x)` with one numerator per substituted coordinate and a
/// shared denominator.
///
/// The domain is the eliminated simplex `{x >= 0, sum x <= 1}` over the
/// map's variables.
#[derive(Clone, Debug, PartialEq)]
pub struct RationalMap<C: Coeff = f64> {
    numerators: Vec<Polynomial<C>>,
    denominator: Polynomial<C>,
}

impl<C: Coeff> RationalMap<C> {
    pub fn numerators(&self) -> &[Polynomial<C>] {
        &self.numerators
    }

    pub fn denominator(&self) -> &Polynomial<C> {
        &self.denominator
    }

    pub fn vars(&self) -> &Variables {
        self.denominator.vars()
    }

    /// Builds the map without the sign checks. Used for exact copies of a
    /// map that was already checked in float arithmetic.
    pub fn from_parts_unchecked(numerators: Vec<Polynomial<C>>, denominator: Polynomial<C>) -> Self {
        RationalMap { numerators, denominator }
    }
}

impl RationalMap<f64> {
    /// Checks that the denominator is not identically zero and is
    /// nonnegative on the simplex vertices and a fixed interior grid.
    pub fn new(numerators: Vec<Polynomial>, denominator: Polynomial) -> Result<Self, RationalMapError> {
        if numerators.iter().any(|m| m.vars() != denominator.vars()) {
            return Err(RationalMapError::VariableMismatch);
        }
        if denominator.is_zero() {
            return Err(RationalMapError::ZeroDenominator);
        }
        for point in simplex_check_points(denominator.nvars()) {
            let value = denominator.eval(&point).expect("arity checked");
            if value < -1e-12 {
                return Err(RationalMapError::NegativeDenominator { point, value });
            }
        }
        Ok(RationalMap { numerators, denominator })
    }

    /// Image of `x`, or `None` where the denominator vanishes.
    pub fn eval(&self, x: &[f64]) -> Option<Vec<f64>> {
        let n = self.denominator.eval(x).ok()?;
        if n.abs() <= 1e-300 {
            return None;
        }
        Some(self.numerators.iter().map(|m| m.eval(x).expect("arity") / n).collect())
    }

    pub fn to_rational(&self) -> RationalMap<BigRational> {
        RationalMap {
            numerators: self.numerators.iter().map(Polynomial::to_rational).collect(),
            denominator: self.denominator.to_rational(),
        }
    }
}

/// Vertices of the eliminated simplex plus grid points with spacing 1/8.
fn simplex_check_points(k: usize) -> Vec<Vec<f64>> {
    let mut pts = vec![vec![0.0; k]];
    for i in 0..k {
        let mut v = vec![0.0; k];
        v[i] = 1.0;
        pts.push(v);
    }
    if (1..=4).contains(&k) {
        let steps = 8usize;
        let mut idx = vec![0usize; k];
        loop {
            let s: usize = idx.iter().sum();
            if s <= steps {
                pts.push(idx.iter().map(|&i| i as f64 / steps as f64).collect());
            }
            let mut j = 0;
            loop {
                if j == k {
                    return pts;
                }
                idx[j] += 1;
                if idx[j] <= steps {
                    break;
                }
                idx[j] = 0;
                j += 1;
            }
        }
    }
    pts
}

/// `N^d * V(M/N)` where `d` is the degree of `v` in the substituted
/// variables.
///
/// The first `f.numerators().len()` variables of `v` are substituted; any
/// further variables of `v` (such as time) pass through unchanged.
pub fn compose_cleared<C: Coeff>(v: &Polynomial<C>, f: &RationalMap<C>) -> Polynomial<C> {
    let k = f.numerators.len();
    let d = v.terms().map(|(m, _)| (0..k).map(|i| m.exponent(i)).sum::<u32>()).max().unwrap_or(0);
    compose_cleared_with_degree(v, f, d)
}

/// As [`compose_cleared`] with an explicit clearing degree `d`, which must be
/// at least the substituted degree of `v`.
pub fn compose_cleared_with_degree<C: Coeff>(v: &Polynomial<C>, f: &RationalMap<C>, d: u32) -> Polynomial<C> {
    let k = f.numerators.len();
    assert!(v.nvars() >= k, "polynomial has fewer variables than the map substitutes");
    let vars = v.vars().clone();
    let lift = |p: &Polynomial<C>| -> Polynomial<C> {
        let n = vars.len();
        let terms = p.terms().map(|(m, c)| {
            let mut out = Monomial::one(n);
            for i in 0..m.nvars() {
                out = out.with_exponent(i, m.exponent(i));
            }
            (out, c.clone())
        });
        Polynomial::from_terms(vars.clone(), terms)
    };
    let nums: Vec<Polynomial<C>> = f.numerators.iter().map(lift).collect();
    let den = lift(&f.denominator);
    let mut num_pows: Vec<Vec<Polynomial<C>>> =
        nums.iter().map(|m| vec![Polynomial::constant(vars.clone(), C::one()), m.clone()]).collect();
    let mut den_pows = vec![Polynomial::constant(vars.clone(), C::one())];
    for i in 0..d as usize {
        let next = &den_pows[i] * &den;
        den_pows.push(next);
    }
    let mut out = Polynomial::zero(vars.clone());
    for (m, c) in v.terms() {
        let dx: u32 = (0..k).map(|i| m.exponent(i)).sum();
        assert!(dx <= d, "clearing degree below polynomial degree");
        let mut pass = Monomial::one(vars.len());
        for i in k..vars.len() {
            pass = pass.with_exponent(i, m.exponent(i));
        }
        let mut t = Polynomial::from_terms(vars.clone(), [(pass, c.clone())]);
        for i in 0..k {
            let e = m.exponent(i) as usize;
            if e == 0 {
                continue;
            }
            while num_pows[i].len() <= e {
                let next = num_pows[i].last().unwrap() * &nums[i];
                num_pows[i].push(next);
            }
            t = &t * &num_pows[i][e];
        }
        t = &t * &den_pows[(d - dx) as usize];
        out = &out + &t;
    }
    out
}
