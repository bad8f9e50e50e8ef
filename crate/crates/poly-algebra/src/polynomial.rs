use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};
use std::sync::Arc;

use num::BigRational;
use thiserror::Error;

use crate::{Coeff, Monomial};

/// Ordered variable names shared between polynomials.
pub type Variables = Arc<[String]>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PolyError {
    #[error("point has {got} coordinates, polynomial has {expected} variables")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("unknown variable `{0}`")]
    UnknownVariable(String),
}

/// Sparse polynomial; zero coefficients are never stored.
#[derive(Clone, PartialEq)]
pub struct Polynomial<C: Coeff = f64> {
    vars: Variables,
    terms: BTreeMap<Monomial, C>,
}

/// Builds a shared variable list from names.
pub fn variables<S: AsRef<str>>(names: &[S]) -> Variables {
    names.iter().map(|s| s.as_ref().to_string()).collect::<Vec<_>>().into()
}

impl<C: Coeff> Polynomial<C> {
    pub fn zero(vars: Variables) -> Self {
        Polynomial { vars, terms: BTreeMap::new() }
    }

    pub fn constant(vars: Variables, c: C) -> Self {
        let n = vars.len();
        Self::from_terms(vars, [(Monomial::one(n), c)])
    }

    /// The polynomial `x_i`.
    pub fn var(vars: Variables, i: usize) -> Self {
        let n = vars.len();
        Self::from_terms(vars, [(Monomial::var(n, i), C::one())])
    }

    /// Collects terms, summing duplicates and dropping zeros.
    pub fn from_terms(vars: Variables, terms: impl IntoIterator<Item = (Monomial, C)>) -> Self {
        let mut p = Self::zero(vars);
        for (m, c) in terms {
            assert_eq!(m.nvars(), p.vars.len(), "monomial arity");
            p.add_term(m, c);
        }
        p
    }

    pub fn add_term(&mut self, m: Monomial, c: C) {
        if c.is_zero() {
            return;
        }
        match self.terms.entry(m) {
            std::collections::btree_map::Entry::Vacant(e) => {
                e.insert(c);
            }
            std::collections::btree_map::Entry::Occupied(mut e) => {
                let s = e.get().clone() + c;
                if s.is_zero() {
                    e.remove();
                } else {
                    *e.get_mut() = s;
                }
            }
        }
    }

    pub fn vars(&self) -> &Variables {
        &self.vars
    }

    pub fn nvars(&self) -> usize {
        self.vars.len()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Monomial, &C)> {
        self.terms.iter()
    }

    /// Number of nonzero terms.
    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn coeff(&self, m: &Monomial) -> C {
        self.terms.get(m).cloned().unwrap_or_else(C::zero)
    }

    /// Total degree; 0 for the zero polynomial.
    pub fn degree(&self) -> u32 {
        self.terms.keys().next_back().map_or(0, Monomial::degree)
    }

    /// Highest exponent of variable `i`.
    pub fn degree_in(&self, i: usize) -> u32 {
        self.terms.keys().map(|m| m.exponent(i)).max().unwrap_or(0)
    }

    pub fn eval(&self, point: &[C]) -> Result<C, PolyError> {
        if point.len() != self.vars.len() {
            return Err(PolyError::DimensionMismatch { expected: self.vars.len(), got: point.len() });
        }
        // Powers are tabulated once per variable, then each term is a product.
        let maxdeg: Vec<u32> = (0..point.len()).map(|i| self.degree_in(i)).collect();
        let powers: Vec<Vec<C>> = point
            .iter()
            .zip(&maxdeg)
            .map(|(x, &d)| {
                let mut v = Vec::with_capacity(d as usize + 1);
                v.push(C::one());
                for k in 0..d as usize {
                    let next = v[k].clone() * x.clone();
                    v.push(next);
                }
                v
            })
            .collect();
        let mut acc = C::zero();
        for (m, c) in &self.terms {
            let mut t = c.clone();
            for (i, e) in m.exponents().enumerate() {
                if e > 0 {
                    t = t * powers[i][e as usize].clone();
                }
            }
            acc = acc + t;
        }
        Ok(acc)
    }

    pub fn scale(&self, s: &C) -> Self {
        if s.is_zero() {
            return Self::zero(self.vars.clone());
        }
        let terms = self.terms.iter().map(|(m, c)| (m.clone(), c.clone() * s.clone()));
        Self::from_terms(self.vars.clone(), terms)
    }

    pub fn map_coeffs<D: Coeff>(&self, f: impl Fn(&C) -> D) -> Polynomial<D> {
        Polynomial::from_terms(self.vars.clone(), self.terms.iter().map(|(m, c)| (m.clone(), f(c))))
    }

    pub fn pow(&self, k: u32) -> Self {
        let mut acc = Self::constant(self.vars.clone(), C::one());
        let mut base = self.clone();
        let mut k = k;
        while k > 0 {
            if k & 1 == 1 {
                acc = &acc * &base;
            }
            k >>= 1;
            if k > 0 {
                base = &base * &base;
            }
        }
        acc
    }

    /// Rewrites `self` and `other` over a common variable list (the variables
    /// of `self` followed by any new ones of `other`).
    fn aligned(&self, other: &Self) -> (Self, Self) {
        if Arc::ptr_eq(&self.vars, &other.vars) || self.vars == other.vars {
            return (self.clone(), other.clone());
        }
        let mut names: Vec<String> = self.vars.to_vec();
        let map_other: Vec<usize> = other
            .vars
            .iter()
            .map(|v| match names.iter().position(|n| n == v) {
                Some(i) => i,
                None => {
                    names.push(v.clone());
                    names.len() - 1
                }
            })
            .collect();
        let vars: Variables = names.into();
        let map_self: Vec<usize> = (0..self.vars.len()).collect();
        (self.with_vars_mapped(&vars, &map_self), other.with_vars_mapped(&vars, &map_other))
    }

    fn with_vars_mapped(&self, vars: &Variables, map: &[usize]) -> Self {
        let n = vars.len();
        Self::from_terms(vars.clone(), self.terms.iter().map(|(m, c)| (m.remap(map, n), c.clone())))
    }

    /// Re-expresses the polynomial over `vars`, which must contain every
    /// variable that appears with a nonzero exponent.
    pub fn in_variables(&self, vars: &Variables) -> Result<Self, PolyError> {
        let n = vars.len();
        let mut map = Vec::with_capacity(self.vars.len());
        for (i, v) in self.vars.iter().enumerate() {
            match vars.iter().position(|n| n == v) {
                Some(j) => map.push(j),
                None => {
                    if self.terms.keys().any(|m| m.exponent(i) > 0) {
                        return Err(PolyError::UnknownVariable(v.clone()));
                    }
                    map.push(usize::MAX);
                }
            }
        }
        let terms = self.terms.iter().map(|(m, c)| {
            let mut out = Monomial::one(n);
            for (i, e) in m.exponents().enumerate() {
                if e > 0 {
                    out = out.with_exponent(map[i], e);
                }
            }
            (out, c.clone())
        });
        Ok(Self::from_terms(vars.clone(), terms))
    }

    /// Substitutes polynomial `subs[i]` for variable `i`. All substitutes must
    /// share one variable list, which becomes the result's.
    pub fn compose(&self, subs: &[Polynomial<C>]) -> Polynomial<C> {
        assert_eq!(subs.len(), self.vars.len(), "one substitute per variable");
        let vars = subs.first().map(|s| s.vars.clone()).unwrap_or_else(|| self.vars.clone());
        let mut cache: Vec<Vec<Polynomial<C>>> =
            subs.iter().map(|s| vec![Polynomial::constant(vars.clone(), C::one()), s.clone()]).collect();
        let mut out = Polynomial::zero(vars.clone());
        for (m, c) in &self.terms {
            let mut t = Polynomial::constant(vars.clone(), c.clone());
            for (i, e) in m.exponents().enumerate() {
                if e == 0 {
                    continue;
                }
                while cache[i].len() <= e as usize {
                    let next = cache[i].last().unwrap() * &subs[i];
                    cache[i].push(next);
                }
                t = &t * &cache[i][e as usize];
            }
            out = &out + &t;
        }
        out
    }

    /// Substitutes a polynomial for a single variable.
    pub fn substitute(&self, i: usize, sub: &Polynomial<C>) -> Polynomial<C> {
        let subs: Vec<Polynomial<C>> =
            (0..self.vars.len()).map(|j| if j == i { sub.clone() } else { Polynomial::var(self.vars.clone(), j) }).collect();
        self.compose(&subs)
    }

    /// Largest absolute coefficient.
    pub fn max_abs_coeff(&self) -> f64 {
        self.terms.values().map(|c| c.to_f64().abs()).fold(0.0, f64::max)
    }
}

impl Polynomial<f64> {
    pub fn to_rational(&self) -> Polynomial<BigRational> {
        self.map_coeffs(|c| BigRational::from_float(*c).expect("finite coefficient"))
    }

    /// Drops terms with magnitude at most `tol`.
    pub fn pruned(&self, tol: f64) -> Self {
        Self::from_terms(self.vars.clone(), self.terms.iter().filter(|(_, c)| c.abs() > tol).map(|(m, c)| (m.clone(), *c)))
    }
}

impl Polynomial<BigRational> {
    pub fn to_f64(&self) -> Polynomial<f64> {
        self.map_coeffs(Coeff::to_f64)
    }
}

macro_rules! binop {
    ($trait:ident, $method:ident, $body:expr) => {
        impl<C: Coeff> $trait<&Polynomial<C>> for &Polynomial<C> {
            type Output = Polynomial<C>;
            fn $method(self, rhs: &Polynomial<C>) -> Polynomial<C> {
                let (a, b) = self.aligned(rhs);
                #[allow(clippy::redundant_closure_call)]
                ($body)(a, b)
            }
        }
        impl<C: Coeff> $trait<Polynomial<C>> for Polynomial<C> {
            type Output = Polynomial<C>;
            fn $method(self, rhs: Polynomial<C>) -> Polynomial<C> {
                (&self).$method(&rhs)
            }
        }
    };
}

binop!(Add, add, |mut a: Polynomial<C>, b: Polynomial<C>| {
    for (m, c) in b.terms {
        a.add_term(m, c);
    }
    a
});

binop!(Sub, sub, |mut a: Polynomial<C>, b: Polynomial<C>| {
    for (m, c) in b.terms {
        a.add_term(m, -c);
    }
    a
});

binop!(Mul, mul, |a: Polynomial<C>, b: Polynomial<C>| {
    let mut out = Polynomial::zero(a.vars.clone());
    for (ma, ca) in &a.terms {
        for (mb, cb) in &b.terms {
            out.add_term(ma.mul(mb), ca.clone() * cb.clone());
        }
    }
    out
});

impl<C: Coeff> Neg for &Polynomial<C> {
    type Output = Polynomial<C>;
    fn neg(self) -> Polynomial<C> {
        self.map_coeffs(|c| -c.clone())
    }
}

impl<C: Coeff> Neg for Polynomial<C> {
    type Output = Polynomial<C>;
    fn neg(self) -> Polynomial<C> {
        -&self
    }
}

impl fmt::Display for Polynomial<f64> {
    /// Round-trip text form: terms from highest to lowest in graded-lex order.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        for (k, (m, &c)) in self.terms.iter().rev().enumerate() {
            let (sign, mag) = if c < 0.0 { ("-", -c) } else { ("+", c) };
            if k == 0 {
                if sign == "-" {
                    write!(f, "-")?;
                }
            } else {
                write!(f, " {} ", sign)?;
            }
            if m.is_one() {
                write!(f, "{}", mag)?;
            } else if mag == 1.0 {
                write!(f, "{}", m.format_with(&self.vars))?;
            } else {
                write!(f, "{}*{}", mag, m.format_with(&self.vars))?;
            }
        }
        Ok(())
    }
}

impl<C: Coeff> fmt::Debug for Polynomial<C> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.terms.iter().map(|(m, c)| format!("{:?}*{}", c, m.format_with(&self.vars))).collect();
        write!(f, "Polynomial[{}]({})", self.vars.join(","), parts.join(" + "))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn vars2() -> Variables {
        variables(&["b1", "b2"])
    }

    #[test]
    fn eval_examples() {
        let v = vars2();
        let b1 = Polynomial::<f64>::var(v.clone(), 0);
        let b2 = Polynomial::<f64>::var(v.clone(), 1);
        assert_eq!((&b1 + &b2).eval(&[0.3, 0.7]).unwrap(), 1.0);
        let cross = (&b1 * &b2).scale(&2.0);
        let p = &(&b1 * &b1) - &cross;
        assert_eq!(p.eval(&[1.0, 0.0]).unwrap(), 1.0);
        assert!(matches!(p.eval(&[1.0]), Err(PolyError::DimensionMismatch { .. })));
    }

    #[test]
    fn difference_of_squares() {
        let v = variables(&["b1"]);
        let x = Polynomial::<f64>::var(v.clone(), 0);
        let one = Polynomial::constant(v.clone(), 1.0);
        let p = &(&x + &one) * &(&x - &one);
        let expected = &(&x * &x) - &one;
        assert_eq!(p, expected);
        assert_eq!(p.degree(), 2);
        assert_eq!(&p + &Polynomial::zero(v), p);
    }

    #[test]
    fn union_of_variables() {
        let a = Polynomial::<f64>::var(variables(&["x"]), 0);
        let b = Polynomial::<f64>::var(variables(&["y"]), 0);
        let s = &a + &b;
        assert_eq!(s.vars().as_ref(), &["x".to_string(), "y".to_string()]);
        assert_eq!(s.eval(&[2.0, 3.0]).unwrap(), 5.0);
    }

    #[test]
    fn substitution_eliminates_last_coordinate() {
        let v = vars2();
        let b1 = Polynomial::<f64>::var(v.clone(), 0);
        let b2 = Polynomial::<f64>::var(v.clone(), 1);
        let p = &b1 * &b2;
        let one_minus_b1 = &Polynomial::constant(v.clone(), 1.0) - &b1;
        let q = p.substitute(1, &one_minus_b1);
        assert_eq!(q.eval(&[0.25, 123.0]).unwrap(), 0.25 * 0.75);
        assert_eq!(q.degree_in(1), 0);
    }

    #[test]
    fn display_form() {
        let v = vars2();
        let b1 = Polynomial::<f64>::var(v.clone(), 0);
        let b2 = Polynomial::<f64>::var(v.clone(), 1);
        let p = &(&b1 * &b1).scale(&3.0) - &(&b2 + &Polynomial::constant(v, 0.5));
        assert_eq!(p.to_string(), "3*b1^2 - b2 - 0.5");
    }
}
