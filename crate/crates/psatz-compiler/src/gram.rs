use lp_core::{LinearProgram, Relation, VarKind};
use poly_algebra::{Monomial, Polynomial, Variables};

use crate::{LinExpr, LinPoly};

/// How the diagonally dominant cone is written as linear constraints.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum DsosForm {
    /// Nonnegative weights on the extreme rays `e_i e_i^T` and
    /// `(e_i +- e_j)(e_i +- e_j)^T`; no extra rows.
    #[default]
    ExtremeRays,
    /// Free Gram entries with `G_ii >= sum_j u_ij`, `u_ij >= +-G_ij`.
    AbsoluteValue,
}

/// Gram matrix `G` over a monomial half-basis `z`, representing `z^T G z`.
///
/// Entries are affine expressions in LP variables, stored as the upper
/// triangle in row-major order.
#[derive(Clone, Debug)]
pub struct GramConstraint {
    pub label: String,
    pub basis: Vec<Monomial>,
    entries: Vec<LinExpr>,
    pub form: DsosForm,
}

fn tri(k: usize, i: usize, j: usize) -> usize {
    let (i, j) = if i <= j { (i, j) } else { (j, i) };
    i * k - i * (i + 1) / 2 + j
}

impl GramConstraint {
    /// One free LP variable per upper-triangular entry.
    pub fn symbolic(lp: &mut LinearProgram, label: &str, basis: Vec<Monomial>) -> Self {
        let k = basis.len();
        let mut entries = Vec::with_capacity(k * (k + 1) / 2);
        for i in 0..k {
            for j in i..k {
                entries.push(LinExpr::var(lp.add_var(format!("{label}.G[{i},{j}]"), VarKind::Free)));
            }
        }
        GramConstraint { label: label.to_string(), basis, entries, form: DsosForm::AbsoluteValue }
    }

    /// Diagonally dominant by construction: a nonnegative combination of
    /// the cone's extreme rays.
    pub fn rays(lp: &mut LinearProgram, label: &str, basis: Vec<Monomial>) -> Self {
        let k = basis.len();
        let mut entries = vec![LinExpr::default(); k * (k + 1) / 2];
        for i in 0..k {
            let d = lp.add_var(format!("{label}.d[{i}]"), VarKind::NonNegative);
            entries[tri(k, i, i)].add_term(d, 1.0);
        }
        for i in 0..k {
            for j in i + 1..k {
                let p = lp.add_var(format!("{label}.p[{i},{j}]"), VarKind::NonNegative);
                let m = lp.add_var(format!("{label}.m[{i},{j}]"), VarKind::NonNegative);
                for idx in [tri(k, i, i), tri(k, j, j)] {
                    entries[idx].add_term(p, 1.0);
                    entries[idx].add_term(m, 1.0);
                }
                entries[tri(k, i, j)].add_term(p, 1.0);
                entries[tri(k, i, j)].add_term(m, -1.0);
            }
        }
        GramConstraint { label: label.to_string(), basis, entries, form: DsosForm::ExtremeRays }
    }

    pub fn size(&self) -> usize {
        self.basis.len()
    }

    pub fn entry(&self, i: usize, j: usize) -> &LinExpr {
        &self.entries[tri(self.size(), i, j)]
    }

    /// `g * z^T G z` as a polynomial with affine coefficients.
    pub fn times(&self, g: &Polynomial) -> LinPoly {
        let mut out = LinPoly::zero(g.vars().clone());
        let k = self.size();
        for i in 0..k {
            for j in i..k {
                let e = self.entry(i, j);
                if e.is_zero() {
                    continue;
                }
                let zz = self.basis[i].mul(&self.basis[j]);
                let mult = if i == j { 1.0 } else { 2.0 };
                for (m, &c) in g.terms() {
                    out.add_monomial(zz.mul(m), e, mult * c);
                }
            }
        }
        out
    }

    /// `z^T G z`.
    pub fn polynomial(&self, vars: &Variables) -> LinPoly {
        self.times(&Polynomial::constant(vars.clone(), 1.0))
    }

    /// Numeric Gram matrix at an LP solution.
    pub fn evaluate(&self, x: &[f64]) -> Vec<Vec<f64>> {
        let k = self.size();
        let mut g = vec![vec![0.0; k]; k];
        for i in 0..k {
            for j in i..k {
                let v = self.entry(i, j).eval(x);
                g[i][j] = v;
                g[j][i] = v;
            }
        }
        g
    }
}

/// Linear inequalities forcing `gram` to be diagonally dominant:
/// `G_ii >= sum_{j != i} u_ij` and `u_ij >= G_ij`, `u_ij >= -G_ij`.
/// Returns the indices of the added rows.
pub fn dsos_relax(gram: &GramConstraint, lp: &mut LinearProgram) -> Vec<usize> {
    let k = gram.size();
    let mut u = vec![vec![usize::MAX; k]; k];
    let mut rows = Vec::new();
    for i in 0..k {
        for j in i + 1..k {
            let id = lp.add_var(format!("{}.u[{i},{j}]", gram.label), VarKind::NonNegative);
            u[i][j] = id;
            u[j][i] = id;
            let g = gram.entry(i, j);
            let mut up = LinExpr::var(id);
            up.add_scaled(g, -1.0);
            rows.push(add_row(lp, format!("{}.abs+[{i},{j}]", gram.label), &up));
            let mut dn = LinExpr::var(id);
            dn.add_scaled(g, 1.0);
            rows.push(add_row(lp, format!("{}.abs-[{i},{j}]", gram.label), &dn));
        }
    }
    for i in 0..k {
        let mut e = gram.entry(i, i).clone();
        for (j, uj) in u[i].iter().enumerate() {
            if j != i {
                e.add_term(*uj, -1.0);
            }
        }
        rows.push(add_row(lp, format!("{}.dd[{i}]", gram.label), &e));
    }
    rows
}

/// Adds `e >= 0`.
fn add_row(lp: &mut LinearProgram, name: String, e: &LinExpr) -> usize {
    lp.add_constraint(name, e.terms.iter().map(|(&k, &v)| (k, v)), Relation::Ge, -e.constant)
}
