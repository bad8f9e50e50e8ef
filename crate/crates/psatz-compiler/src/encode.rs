use lp_core::{LinearProgram, LpSolution, Relation, SolveOptions, VarKind};
use poly_algebra::{monomial_basis, Monomial, Polynomial, Variables};

use crate::gram::{dsos_relax, DsosForm, GramConstraint};
use crate::witness::{GramWitness, PsatzWitness};
use crate::{DecisionPolynomial, LinExpr, LinPoly, PsatzError};

#[derive(Clone, Debug, Default)]
pub struct PsatzOptions {
    pub form: DsosForm,
    /// Identity degree used for multiplier caps; at least the target degree.
    pub degree_bound: Option<u32>,
}

/// `target >= margin * margin_weight` on `{x : g_j(x) >= 0 for all j}`.
#[derive(Clone, Debug)]
pub struct PositivityConstraint {
    pub label: String,
    pub target: LinPoly,
    pub generators: Vec<Polynomial>,
    pub margin: f64,
    /// Defaults to the constant 1.
    pub margin_weight: Option<Polynomial>,
    /// Per-generator total-degree caps for `s_j`; default from the identity degree.
    pub multiplier_degrees: Option<Vec<u32>>,
    /// Total-degree cap for `s0`.
    pub s0_degree: Option<u32>,
}

impl PositivityConstraint {
    pub fn new(label: impl Into<String>, target: LinPoly, generators: Vec<Polynomial>) -> Self {
        PositivityConstraint {
            label: label.into(),
            target,
            generators,
            margin: 0.0,
            margin_weight: None,
            multiplier_degrees: None,
            s0_degree: None,
        }
    }

    pub fn with_margin(mut self, margin: f64) -> Self {
        assert!(margin >= 0.0, "strictness margin must be nonnegative");
        self.margin = margin;
        self
    }

    pub fn with_margin_weight(mut self, weight: Polynomial) -> Self {
        self.margin_weight = Some(weight);
        self
    }
}

/// The Gram blocks created for one constraint.
#[derive(Clone, Debug)]
pub struct ConstraintHandle {
    pub label: String,
    pub target: LinPoly,
    pub generators: Vec<Polynomial>,
    pub margin: f64,
    pub margin_weight: Polynomial,
    pub s0: GramConstraint,
    pub multipliers: Vec<Option<GramConstraint>>,
    pub rows: std::ops::Range<usize>,
}

/// Accumulates decision variables, positivity constraints and side rows
/// into one [`LinearProgram`].
#[derive(Clone, Debug, Default)]
pub struct ProgramBuilder {
    lp: LinearProgram,
    pub options: PsatzOptions,
    handles: Vec<ConstraintHandle>,
}

impl ProgramBuilder {
    pub fn new(options: PsatzOptions) -> Self {
        ProgramBuilder { lp: LinearProgram::new(), options, handles: Vec::new() }
    }

    pub fn program(&self) -> &LinearProgram {
        &self.lp
    }

    pub fn handles(&self) -> &[ConstraintHandle] {
        &self.handles
    }

    pub fn add_var(&mut self, name: impl Into<String>, kind: VarKind) -> usize {
        self.lp.add_var(name, kind)
    }

    /// Declares an unknown polynomial over `basis` with free coefficients.
    pub fn decision_polynomial(&mut self, name: &str, vars: &Variables, basis: Vec<Monomial>) -> DecisionPolynomial {
        let ids = basis.iter().map(|m| self.lp.add_var(format!("{name}[{}]", m.format_with(vars)), VarKind::Free)).collect();
        DecisionPolynomial { name: name.to_string(), vars: vars.clone(), basis, ids }
    }

    /// Adds `e (relation) 0`.
    pub fn add_row(&mut self, name: impl Into<String>, e: &LinExpr, relation: Relation) -> usize {
        self.lp.add_constraint(name, e.terms.iter().map(|(&k, &v)| (k, v)), relation, -e.constant)
    }

    /// Minimizes `e` (its constant part is dropped).
    pub fn set_objective(&mut self, e: &LinExpr) {
        self.lp.set_objective(e.terms.iter().map(|(&k, &v)| (k, v)));
    }

    pub fn solve(&self, opts: &SolveOptions) -> Result<LpSolution, PsatzError> {
        Ok(lp_core::solve(&self.lp, opts)?)
    }

    /// Encodes one constraint; returns its handle index.
    pub fn add_positivity(&mut self, c: &PositivityConstraint) -> Result<usize, PsatzError> {
        let vars = c.target.vars().clone();
        if c.generators.iter().any(|g| g.vars() != &vars) {
            return Err(PsatzError::VariableMismatch(c.label.clone()));
        }
        let weight = c.margin_weight.clone().unwrap_or_else(|| Polynomial::constant(vars.clone(), 1.0));
        if weight.vars() != &vars {
            return Err(PsatzError::VariableMismatch(c.label.clone()));
        }
        let target_deg = c.target.degree().max(if c.margin > 0.0 { weight.degree() } else { 0 });
        let d = target_deg.max(self.options.degree_bound.unwrap_or(0));
        let s0_cap = c.s0_degree.unwrap_or(d);
        let caps: Vec<Option<u32>> = c
            .generators
            .iter()
            .enumerate()
            .map(|(j, g)| match &c.multiplier_degrees {
                Some(v) => Some(v[j]),
                None => d.checked_sub(g.degree()),
            })
            .collect();
        let reachable =
            caps.iter().zip(&c.generators).filter_map(|(cap, g)| cap.map(|k| 2 * (k / 2) + g.degree())).fold(2 * (s0_cap / 2), u32::max);
        if reachable < target_deg {
            return Err(PsatzError::DegreeMismatch { label: c.label.clone(), target: target_deg, reachable });
        }

        let row_start = self.lp.num_constraints();
        let s0 = self.gram(&format!("{}.s0", c.label), monomial_basis(vars.len(), s0_cap / 2));
        let mut residual = c.target.clone();
        residual.add_product(&weight, &LinExpr::constant(c.margin), -1.0);
        residual.add_linpoly(&s0.polynomial(&vars), -1.0);
        let mut multipliers = Vec::with_capacity(c.generators.len());
        for (j, (g, cap)) in c.generators.iter().zip(&caps).enumerate() {
            match cap {
                Some(k) => {
                    let s = self.gram(&format!("{}.s{}", c.label, j + 1), monomial_basis(vars.len(), k / 2));
                    residual.add_linpoly(&s.times(g), -1.0);
                    multipliers.push(Some(s));
                }
                None => multipliers.push(None),
            }
        }
        for (m, e) in residual.terms() {
            if e.is_constant() && e.constant.abs() < 1e-15 {
                continue;
            }
            self.add_row(format!("{}.match[{}]", c.label, m.format_with(&vars)), e, Relation::Eq);
        }
        let rows = row_start..self.lp.num_constraints();
        self.handles.push(ConstraintHandle {
            label: c.label.clone(),
            target: c.target.clone(),
            generators: c.generators.clone(),
            margin: c.margin,
            margin_weight: weight,
            s0,
            multipliers,
            rows,
        });
        Ok(self.handles.len() - 1)
    }

    fn gram(&mut self, label: &str, basis: Vec<Monomial>) -> GramConstraint {
        match self.options.form {
            DsosForm::ExtremeRays => GramConstraint::rays(&mut self.lp, label, basis),
            DsosForm::AbsoluteValue => {
                let g = GramConstraint::symbolic(&mut self.lp, label, basis);
                dsos_relax(&g, &mut self.lp);
                g
            }
        }
    }

    /// Numeric witness of constraint `handle` at LP point `x`.
    pub fn witness(&self, handle: usize, x: &[f64]) -> PsatzWitness {
        let h = &self.handles[handle];
        let gram = |g: &GramConstraint| {
            let mut w = GramWitness { basis: g.basis.clone(), matrix: g.evaluate(x) };
            w.make_exactly_dominant();
            w
        };
        PsatzWitness {
            label: h.label.clone(),
            target: h.target.eval_coeffs(x),
            margin: h.margin,
            margin_weight: h.margin_weight.clone(),
            generators: h.generators.clone(),
            s0: gram(&h.s0),
            multipliers: h.multipliers.iter().map(|m| m.as_ref().map(gram)).collect(),
        }
    }

    pub fn witnesses(&self, x: &[f64]) -> Vec<PsatzWitness> {
        (0..self.handles.len()).map(|h| self.witness(h, x)).collect()
    }
}

/// Encodes one positivity constraint into `builder`.
pub fn encode_psatz(builder: &mut ProgramBuilder, c: &PositivityConstraint) -> Result<usize, PsatzError> {
    builder.add_positivity(c)
}

/// Stacks constraints into `builder`, whose decision polynomials the
/// constraints reference.
pub fn assemble_program(mut builder: ProgramBuilder, constraints: &[PositivityConstraint]) -> Result<ProgramBuilder, PsatzError> {
    for c in constraints {
        builder.add_positivity(c)?;
    }
    Ok(builder)
}

/// `x_i >= 0` for the first `k` variables and `1 - sum x_i >= 0`.
pub fn simplex_generators(vars: &Variables, k: usize) -> Vec<Polynomial> {
    let mut out: Vec<Polynomial> = (0..k).map(|i| Polynomial::var(vars.clone(), i)).collect();
    let sum = out.iter().fold(Polynomial::zero(vars.clone()), |a, b| &a + b);
    out.push(&Polynomial::constant(vars.clone(), 1.0) - &sum);
    out
}

/// All products of one or more `base` generators with total degree at most
/// `max_degree`, in a fixed order, without duplicates.
pub fn product_generators(base: &[Polynomial], max_degree: u32) -> Vec<Polynomial> {
    let mut out: Vec<Polynomial> = Vec::new();
    let mut frontier: Vec<(usize, Polynomial)> = Vec::new();
    for (i, g) in base.iter().enumerate() {
        if g.degree() <= max_degree && !g.is_zero() {
            frontier.push((i, g.clone()));
        }
    }
    while !frontier.is_empty() {
        let mut next = Vec::new();
        for (last, p) in &frontier {
            if !out.contains(p) {
                out.push(p.clone());
            }
            for (i, g) in base.iter().enumerate().skip(*last) {
                if g.degree() >= 1 && p.degree() + g.degree() <= max_degree {
                    next.push((i, p * g));
                }
            }
        }
        frontier = next;
    }
    out
}
