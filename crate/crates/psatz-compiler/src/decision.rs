use std::collections::BTreeMap;
use std::ops::{Add, Neg, Sub};

use poly_algebra::{Monomial, Polynomial, Variables};

/// Affine expression `constant + sum_k coef_k * x_k` over LP variable ids.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct LinExpr {
    pub terms: BTreeMap<usize, f64>,
    pub constant: f64,
}

impl LinExpr {
    pub fn constant(c: f64) -> Self {
        LinExpr { terms: BTreeMap::new(), constant: c }
    }

    pub fn var(id: usize) -> Self {
        Self::term(id, 1.0)
    }

    pub fn term(id: usize, coef: f64) -> Self {
        let mut terms = BTreeMap::new();
        if coef != 0.0 {
            terms.insert(id, coef);
        }
        LinExpr { terms, constant: 0.0 }
    }

    pub fn is_zero(&self) -> bool {
        self.constant == 0.0 && self.terms.is_empty()
    }

    pub fn is_constant(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn add_scaled(&mut self, other: &LinExpr, s: f64) {
        if s == 0.0 {
            return;
        }
        self.constant += s * other.constant;
        for (&k, &v) in &other.terms {
            add_coef(&mut self.terms, k, s * v);
        }
    }

    pub fn add_term(&mut self, id: usize, coef: f64) {
        add_coef(&mut self.terms, id, coef);
    }

    pub fn scale(&self, s: f64) -> LinExpr {
        let mut out = LinExpr::default();
        out.add_scaled(self, s);
        out
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        self.constant + self.terms.iter().map(|(&k, &v)| v * x[k]).sum::<f64>()
    }
}

fn add_coef(terms: &mut BTreeMap<usize, f64>, k: usize, v: f64) {
    if v == 0.0 {
        return;
    }
    let e = terms.entry(k).or_insert(0.0);
    *e += v;
    if *e == 0.0 {
        terms.remove(&k);
    }
}

/// Polynomial whose coefficients are affine in LP decision variables.
#[derive(Clone, Debug, PartialEq)]
pub struct LinPoly {
    vars: Variables,
    terms: BTreeMap<Monomial, LinExpr>,
}

impl LinPoly {
    pub fn zero(vars: Variables) -> Self {
        LinPoly { vars, terms: BTreeMap::new() }
    }

    pub fn vars(&self) -> &Variables {
        &self.vars
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Monomial, &LinExpr)> {
        self.terms.iter()
    }

    pub fn coeff(&self, m: &Monomial) -> Option<&LinExpr> {
        self.terms.get(m)
    }

    /// Largest degree of a monomial with a nonzero coefficient expression.
    pub fn degree(&self) -> u32 {
        self.terms.keys().map(Monomial::degree).max().unwrap_or(0)
    }

    pub fn add_monomial(&mut self, m: Monomial, e: &LinExpr, s: f64) {
        if s == 0.0 || e.is_zero() {
            return;
        }
        let slot = self.terms.entry(m.clone()).or_default();
        slot.add_scaled(e, s);
        if slot.is_zero() {
            self.terms.remove(&m);
        }
    }

    /// `self += s * p * e` for a known polynomial `p`.
    pub fn add_product(&mut self, p: &Polynomial, e: &LinExpr, s: f64) {
        assert!(p.vars() == &self.vars, "variable lists differ");
        for (m, &c) in p.terms() {
            self.add_monomial(m.clone(), e, s * c);
        }
    }

    pub fn add_linpoly(&mut self, other: &LinPoly, s: f64) {
        assert!(other.vars == self.vars, "variable lists differ");
        for (m, e) in &other.terms {
            self.add_monomial(m.clone(), e, s);
        }
    }

    /// Lifts a known polynomial.
    pub fn from_poly(p: &Polynomial) -> Self {
        let mut out = LinPoly::zero(p.vars().clone());
        out.add_product(p, &LinExpr::constant(1.0), 1.0);
        out
    }

    /// Product with a known polynomial.
    pub fn mul_poly(&self, p: &Polynomial) -> LinPoly {
        assert!(p.vars() == &self.vars, "variable lists differ");
        let mut out = LinPoly::zero(self.vars.clone());
        for (m, e) in &self.terms {
            for (mp, &c) in p.terms() {
                out.add_monomial(m.mul(mp), e, c);
            }
        }
        out
    }

    pub fn scale(&self, s: f64) -> LinPoly {
        let mut out = LinPoly::zero(self.vars.clone());
        out.add_linpoly(self, s);
        out
    }

    /// Substitutes the LP solution.
    pub fn eval_coeffs(&self, x: &[f64]) -> Polynomial {
        Polynomial::from_terms(self.vars.clone(), self.terms.iter().map(|(m, e)| (m.clone(), e.eval(x))))
    }

    /// The known polynomial if no coefficient depends on a decision variable.
    pub fn as_constant(&self) -> Option<Polynomial> {
        if self.terms.values().all(LinExpr::is_constant) {
            Some(self.eval_coeffs(&[]))
        } else {
            None
        }
    }
}

impl Add for &LinPoly {
    type Output = LinPoly;
    fn add(self, rhs: &LinPoly) -> LinPoly {
        let mut out = self.clone();
        out.add_linpoly(rhs, 1.0);
        out
    }
}

impl Sub for &LinPoly {
    type Output = LinPoly;
    fn sub(self, rhs: &LinPoly) -> LinPoly {
        let mut out = self.clone();
        out.add_linpoly(rhs, -1.0);
        out
    }
}

impl Neg for &LinPoly {
    type Output = LinPoly;
    fn neg(self) -> LinPoly {
        self.scale(-1.0)
    }
}

/// Unknown polynomial `sum_k x_{ids[k]} * basis[k]`.
#[derive(Clone, Debug, PartialEq)]
pub struct DecisionPolynomial {
    pub name: String,
    pub vars: Variables,
    pub basis: Vec<Monomial>,
    pub ids: Vec<usize>,
}

impl DecisionPolynomial {
    pub fn to_linpoly(&self) -> LinPoly {
        let mut out = LinPoly::zero(self.vars.clone());
        for (m, &id) in self.basis.iter().zip(&self.ids) {
            out.add_monomial(m.clone(), &LinExpr::var(id), 1.0);
        }
        out
    }

    /// Applies a linear map on polynomials: `L(sum x_k m_k) = sum x_k L(m_k)`.
    /// `op` receives each basis monomial as a polynomial in `self.vars`.
    pub fn map_linear(&self, out_vars: &Variables, op: impl Fn(&Polynomial) -> Polynomial) -> LinPoly {
        let mut out = LinPoly::zero(out_vars.clone());
        for (m, &id) in self.basis.iter().zip(&self.ids) {
            let image = op(&Polynomial::from_terms(self.vars.clone(), [(m.clone(), 1.0)]));
            let image = image.in_variables(out_vars).expect("image lies in output variables");
            out.add_product(&image, &LinExpr::var(id), 1.0);
        }
        out
    }

    pub fn value(&self, x: &[f64]) -> Polynomial {
        Polynomial::from_terms(self.vars.clone(), self.basis.iter().zip(&self.ids).map(|(m, &id)| (m.clone(), x[id])))
    }
}
