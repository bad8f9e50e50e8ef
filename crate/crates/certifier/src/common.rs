use lp_core::{SolveOptions, Status};
use poly_algebra::{compose_cleared_with_degree, Monomial, Polynomial, RationalMap, Variables};
use pomdp_core::eliminate_last;
use psatz_compiler::{
    check_identity, product_generators, simplex_generators, DecisionPolynomial, DsosForm, LinExpr, LinPoly, ProgramBuilder, PsatzWitness,
};

use crate::CertError;

/// Largest coefficient-wise residual accepted for a Psatz identity.
pub(crate) const IDENTITY_TOL: f64 = 1e-7;

/// Whether every witness is diagonally dominant and matches its identity.
/// Solver output that fails this is discarded instead of returned.
pub(crate) fn witnesses_hold(witnesses: &[PsatzWitness]) -> bool {
    witnesses.iter().all(|w| {
        let r = check_identity(w);
        r.diagonally_dominant && r.passes(IDENTITY_TOL)
    })
}

#[derive(Clone, Debug, PartialEq)]
pub struct AlternationOptions {
    /// Upper bound on (synthesis, multiplier refit) rounds.
    pub max_iters: usize,
    /// Stop once the objective improves by less than this over a round.
    pub tol: f64,
}

impl Default for AlternationOptions {
    fn default() -> Self {
        AlternationOptions { max_iters: 20, tol: 1e-4 }
    }
}

#[derive(Clone, Debug)]
pub struct CertifierOptions {
    pub form: DsosForm,
    /// Products of domain generators up to this degree join the generator list.
    pub product_degree: u32,
    /// Strictness margin of strict inequalities. Synthesized barriers use a
    /// unit margin instead; hand-supplied barriers are checked with this one.
    pub margin: f64,
    /// Sublevel value defining reachable-set over-approximations.
    pub level: f64,
    /// Upper bound imposed on Lyapunov-type functions over the simplex.
    pub cap: f64,
    /// Largest power of the time variable in barrier functions.
    pub time_degree: u32,
    pub alternation: AlternationOptions,
    pub solver: SolveOptions,
}

impl Default for CertifierOptions {
    fn default() -> Self {
        CertifierOptions {
            form: DsosForm::default(),
            product_degree: 2,
            margin: 1e-6,
            level: 1.0,
            cap: 2.0,
            time_degree: 2,
            alternation: AlternationOptions::default(),
            solver: SolveOptions { rule: lp_core::PivotRule::Dantzig, perturbation: 1e-9, ..SolveOptions::default() },
        }
    }
}

/// Where a piece of a certificate applies.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Scope {
    All,
    Action(usize),
    /// Policy region index; the default region is numbered after the guards.
    Region(usize),
}

/// A polynomial that is either an LP unknown or already fixed.
#[derive(Clone, Copy, Debug)]
pub(crate) enum Unknown<'a> {
    Decision(&'a DecisionPolynomial),
    Known(&'a Polynomial),
}

impl Unknown<'_> {
    /// Image under a linear operator on polynomials.
    pub fn map(&self, out: &Variables, op: impl Fn(&Polynomial) -> Polynomial) -> LinPoly {
        match self {
            Unknown::Decision(d) => d.map_linear(out, op),
            Unknown::Known(p) => LinPoly::from_poly(&op(p).in_variables(out).expect("image lies in output variables")),
        }
    }

    pub fn identity(&self, out: &Variables) -> LinPoly {
        self.map(out, Polynomial::clone)
    }

    pub fn known(&self) -> Option<&Polynomial> {
        match self {
            Unknown::Known(p) => Some(p),
            Unknown::Decision(_) => None,
        }
    }
}

/// `a * b` where at least one factor is known.
pub(crate) fn product(a: &Unknown, b: &Unknown, out: &Variables) -> LinPoly {
    match (a.known(), b.known()) {
        (Some(pa), _) => b.map(out, |m| pa * m),
        (None, Some(pb)) => a.map(out, |m| m * pb),
        (None, None) => panic!("product of two unknown polynomials is not linear"),
    }
}

/// Mean of `x^alpha` under the uniform distribution on
/// `{x >= 0, sum x <= 1}` in dimension `k`: `prod(alpha_i!) k! / (|alpha| + k)!`.
pub(crate) fn simplex_moment(m: &Monomial, k: usize) -> f64 {
    let a = m.degree() as usize;
    let mut num = 1.0;
    for i in 0..k {
        num *= factorial(m.exponent(i) as usize);
    }
    // k! / (a + k)! = 1 / ((k+1)(k+2)...(k+a))
    let mut den = 1.0;
    for j in (k + 1)..=(k + a) {
        den *= j as f64;
    }
    num / den
}

fn factorial(n: usize) -> f64 {
    (1..=n).map(|i| i as f64).product()
}

/// `sum_k coef_k * E[basis_k]` as an LP expression.
pub(crate) fn mean_expr(p: &DecisionPolynomial, k: usize) -> LinExpr {
    let mut e = LinExpr::default();
    for (m, &id) in p.basis.iter().zip(&p.ids) {
        e.add_term(id, simplex_moment(m, k));
    }
    e
}

/// Generators `base` plus their products up to `product_degree`, deduplicated.
pub(crate) fn with_products(base: Vec<Polynomial>, product_degree: u32) -> Vec<Polynomial> {
    let mut out: Vec<Polynomial> = Vec::new();
    let prods = if product_degree >= 2 { product_generators(&base, product_degree) } else { Vec::new() };
    for g in base.into_iter().chain(prods) {
        if !g.is_zero() && !out.contains(&g) {
            out.push(g);
        }
    }
    out
}

/// Simplex generators over the first `k` variables of `vars`.
pub(crate) fn simplex(vars: &Variables, k: usize) -> Vec<Polynomial> {
    simplex_generators(vars, k)
}

/// Policy regions in eliminated coordinates, first match wins.
#[derive(Clone, Debug)]
pub(crate) struct Regions {
    pub guards: Vec<Polynomial>,
    pub actions: Vec<usize>,
}

impl Regions {
    pub fn from_policy(policy: &pomdp_core::PolicyPartition, n: usize) -> Regions {
        let guards = policy.regions().iter().map(|(g, _)| eliminate_last(g, n)).collect();
        let mut actions: Vec<usize> = policy.regions().iter().map(|r| r.1).collect();
        actions.push(policy.default_action());
        Regions { guards, actions }
    }

    pub fn len(&self) -> usize {
        self.actions.len()
    }

    /// Closure of region `alpha`: earlier guards `>= 0`, own guard `<= 0`.
    pub fn generators(&self, alpha: usize, vars: &Variables) -> Vec<Polynomial> {
        let lift = |g: &Polynomial| g.in_variables(vars).expect("guard over belief coordinates");
        let mut out: Vec<Polynomial> = self.guards[..alpha].iter().map(lift).collect();
        if let Some(g) = self.guards.get(alpha) {
            out.push(-&lift(g));
        }
        out
    }

    /// Generators saying the successor `f(x)` lies in region `beta`, cleared
    /// by powers of the denominator.
    pub fn successor_generators(&self, beta: usize, f: &RationalMap, vars: &Variables) -> Vec<Polynomial> {
        let clear =
            |g: &Polynomial| compose_cleared_with_degree(g, f, g.degree()).in_variables(vars).expect("guard over belief coordinates");
        let mut out: Vec<Polynomial> = self.guards[..beta].iter().map(clear).collect();
        if let Some(g) = self.guards.get(beta) {
            out.push(-&clear(g));
        }
        out
    }
}

/// Runs the LP; `None` when infeasible.
pub(crate) fn solve(builder: &ProgramBuilder, opts: &SolveOptions) -> Result<Option<Vec<f64>>, CertError> {
    let sol = builder.solve(opts)?;
    match sol.status {
        Status::Feasible => Ok(Some(sol.assignment)),
        Status::Infeasible => Ok(None),
        Status::Unbounded => Err(CertError::InvalidInput("certificate program is unbounded".into())),
    }
}
