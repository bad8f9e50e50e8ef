use lp_core::{LinearProgram, Relation, SolveOptions, Status, VarKind};
use poly_algebra::{compose_cleared_with_degree, monomial_basis, variables, Polynomial, Variables};
use pomdp_core::{dirichlet_sample, eliminate_last, rational_maps, to_eliminated, Belief, BranchMap, PolicyPartition, Pomdp};
use psatz_compiler::{DecisionPolynomial, LinExpr, LinPoly, PositivityConstraint, ProgramBuilder, PsatzOptions, PsatzWitness};
use rayon::prelude::*;

use crate::common::{simplex, solve, with_products, witnesses_hold, Regions, Unknown};
use crate::{CertError, CertifierOptions, Scope};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BarrierMode {
    Monolithic,
    /// One barrier per action; any convex combination is a monolithic barrier.
    PerActionHull,
    /// Piecewise barrier under a policy.
    PerPartition,
}

/// Initial beliefs.
#[derive(Clone, Debug, PartialEq)]
pub enum InitialSet {
    Point(Belief),
    /// `{b in simplex : g_i(b) >= 0}` for affine `g_i` over `b1..bn`.
    Polytope(Vec<Polynomial>),
}

/// What must be avoided.
#[derive(Clone, Debug, PartialEq)]
pub enum UnsafeSet {
    /// `sum_{q in states} b(q) > lambda` at the horizon.
    Safety { states: Vec<usize>, lambda: f64 },
    /// Expected reward `r(b, a) = sum_q b(q) R(q, a)` above `tube(t)` at any
    /// step `t <= horizon`, with `sum_t tube(t) <= gamma`.
    Optimality { rewards: Vec<Vec<f64>>, gamma: f64, tube: Polynomial },
}

impl UnsafeSet {
    /// Number of unsafe pieces: one for safety, one per action for optimality.
    fn pieces(&self) -> usize {
        match self {
            UnsafeSet::Safety { .. } => 1,
            UnsafeSet::Optimality { rewards, .. } => rewards.first().map_or(0, Vec::len),
        }
    }
}

pub type BarrierProperty = UnsafeSet;

/// Time-indexed barrier `B(t, b)` over `b1..b_{n-1}, t`.
#[derive(Clone, Debug)]
pub struct BarrierCertificate {
    pub mode: BarrierMode,
    pub degree: u32,
    pub horizon: u32,
    pub property: UnsafeSet,
    pub initial: InitialSet,
    pub functions: Vec<(Polynomial, Scope)>,
    pub policy: Option<PolicyPartition>,
    pub margin: f64,
    pub product_degree: u32,
    pub time_degree: u32,
    /// Unsafe pieces shown empty on the simplex, whose conditions were dropped.
    pub vacuous: Vec<bool>,
    pub witnesses: Vec<PsatzWitness>,
}

impl BarrierCertificate {
    pub fn num_states(&self) -> usize {
        self.functions.first().map_or(1, |f| f.0.nvars())
    }

    /// `B_i(t, b)` at a full belief.
    pub fn eval_function(&self, i: usize, t: f64, b: &[f64]) -> f64 {
        let mut x = to_eliminated(b);
        x.push(t);
        self.functions[i].0.eval(&x).expect("belief dimension matches certificate")
    }

    /// Barrier value used along closed-loop runs: the region's piece in
    /// partition mode, otherwise the unweighted mean of the pieces.
    pub fn value(&self, t: f64, b: &[f64]) -> f64 {
        match self.mode {
            BarrierMode::PerPartition => {
                let alpha = self.policy.as_ref().expect("partition certificate has a policy").region_index(b);
                self.eval_function(alpha, t, b)
            }
            _ => {
                let m = self.functions.len() as f64;
                (0..self.functions.len()).map(|i| self.eval_function(i, t, b)).sum::<f64>() / m
            }
        }
    }

    pub(crate) fn context<'a>(&'a self, pomdp: &'a Pomdp) -> Result<Ctx<'a>, CertError> {
        Ctx::new(
            pomdp,
            self.policy.as_ref(),
            &self.property,
            &self.initial,
            self.horizon,
            self.degree,
            self.margin,
            self.product_degree,
            self.time_degree,
        )
    }

    pub(crate) fn program_width(&self) -> usize {
        match self.mode {
            BarrierMode::PerActionHull => 1,
            _ => self.functions.len(),
        }
    }

    /// Constraints rebuilt from the stored functions in witness order, plus
    /// initial margins `-B(0, b0) - margin` for point initial sets.
    pub(crate) fn recompute(&self, pomdp: &Pomdp) -> Result<(Vec<PositivityConstraint>, Vec<f64>), CertError> {
        let ctx = self.context(pomdp)?;
        if self.vacuous.len() != self.property.pieces() {
            return Err(CertError::ValidationFailure { reason: "vacuity flags do not match the property".into(), point: None });
        }
        let width = self.program_width();
        let mut out = ctx.vacuity_constraints(&self.vacuous);
        let layout = ctx.layout(&self.vacuous);
        let mut init = Vec::new();
        for chunk in self.functions.chunks(width.max(1)) {
            let funcs: Vec<Unknown> = chunk.iter().map(|(v, _)| Unknown::Known(v)).collect();
            out.extend(ctx.constraints(&layout, &funcs));
            if let InitialSet::Point(b0) = &self.initial {
                let f0 = ctx.initial_function();
                let mut x = to_eliminated(b0);
                x.push(0.0);
                init.push(-funcs[f0].known().unwrap().eval(&x).expect("dimension") - self.margin);
            }
        }
        Ok((out, init))
    }
}

/// Barrier functions with the witnesses proving their conditions.
type Synthesized = (Vec<Polynomial>, Vec<PsatzWitness>);

#[derive(Clone, Debug)]
pub(crate) enum Cond {
    /// `-B(0, x) >= margin` on a polytope of initial beliefs.
    Init { func: usize },
    /// `B >= margin` on unsafe piece `piece`.
    Unsafe { func: usize, piece: usize, region: Option<usize> },
    /// `N^d B_src(t - 1, x) - N^d B_dst(t, f(x)) >= 0`.
    Decrease { src: usize, dst: usize, branch: usize, region: Option<usize>, succ: Option<usize> },
}

pub(crate) struct Ctx<'a> {
    pub n: usize,
    pub k: usize,
    /// `b1..b_{n-1}`.
    pub xvars: Variables,
    /// `b1..b_{n-1}, t`.
    pub vars: Variables,
    pub branches: Vec<BranchMap>,
    pub regions: Option<Regions>,
    pub policy: Option<&'a PolicyPartition>,
    pub property: &'a UnsafeSet,
    pub initial: &'a InitialSet,
    pub horizon: u32,
    pub degree: u32,
    pub margin: f64,
    pub product_degree: u32,
    pub time_degree: u32,
}

impl<'a> Ctx<'a> {
    #[allow(clippy::too_many_arguments)]
    fn new(
        pomdp: &Pomdp,
        policy: Option<&'a PolicyPartition>,
        property: &'a UnsafeSet,
        initial: &'a InitialSet,
        horizon: u32,
        degree: u32,
        margin: f64,
        product_degree: u32,
        time_degree: u32,
    ) -> Result<Self, CertError> {
        let n = pomdp.num_states();
        if degree == 0 {
            return Err(CertError::InvalidInput("degree must be at least 1".into()));
        }
        if horizon == 0 {
            return Err(CertError::InvalidInput("horizon must be at least 1".into()));
        }
        match property {
            UnsafeSet::Safety { states, lambda } => {
                if states.is_empty() || states.iter().any(|&q| q >= n) {
                    return Err(CertError::InvalidInput("unsafe states must be a nonempty set of valid states".into()));
                }
                if !(0.0..=1.0).contains(lambda) {
                    return Err(CertError::InvalidInput("lambda must lie in [0, 1]".into()));
                }
            }
            UnsafeSet::Optimality { rewards, tube, .. } => {
                if rewards.len() != n || rewards.iter().any(|r| r.len() != pomdp.num_actions()) {
                    return Err(CertError::InvalidInput("reward table must be states x actions".into()));
                }
                if tube.vars().len() > 1 || tube.vars().iter().any(|v| v != "t") {
                    return Err(CertError::InvalidInput("tube must be a polynomial in t".into()));
                }
            }
        }
        match initial {
            InitialSet::Point(b) if b.len() != n => {
                return Err(CertError::InvalidInput(format!("initial belief has {} entries", b.len())));
            }
            InitialSet::Polytope(gs) if gs.iter().any(|g| g.degree() > 1) => {
                return Err(CertError::InvalidInput("initial polytope needs affine constraints".into()));
            }
            _ => {}
        }
        let xvars = pomdp_core::belief_vars(n);
        let mut names: Vec<String> = xvars.iter().cloned().collect();
        names.push("t".into());
        Ok(Ctx {
            n,
            k: n - 1,
            vars: variables(&names),
            xvars,
            branches: rational_maps(pomdp),
            regions: policy.map(|p| Regions::from_policy(p, n)),
            policy,
            property,
            initial,
            horizon,
            degree,
            margin,
            product_degree,
            time_degree,
        })
    }

    fn num_functions(&self) -> usize {
        self.regions.as_ref().map_or(1, Regions::len)
    }

    fn initial_function(&self) -> usize {
        match (self.policy, self.initial) {
            (Some(p), InitialSet::Point(b)) => p.region_index(b),
            _ => 0,
        }
    }

    fn t(&self) -> Polynomial {
        Polynomial::var(self.vars.clone(), self.k)
    }

    fn lift(&self, p: &Polynomial) -> Polynomial {
        p.in_variables(&self.vars).expect("polynomial over belief coordinates")
    }

    /// Expected reward of action `a` in eliminated coordinates.
    fn reward(&self, a: usize) -> Polynomial {
        let UnsafeSet::Optimality { rewards, .. } = self.property else { unreachable!("optimality only") };
        let full: Vec<String> = (1..=self.n).map(|i| format!("b{i}")).collect();
        let fv = variables(&full);
        let r = (0..self.n).fold(Polynomial::zero(fv.clone()), |acc, q| &acc + &Polynomial::var(fv.clone(), q).scale(&rewards[q][a]));
        eliminate_last(&r, self.n)
    }

    fn tube(&self) -> Polynomial {
        let UnsafeSet::Optimality { tube, .. } = self.property else { unreachable!("optimality only") };
        tube.in_variables(&self.vars).expect("tube over t")
    }

    fn unsafe_mass(&self) -> Polynomial {
        let UnsafeSet::Safety { states, lambda } = self.property else { unreachable!("safety only") };
        let full: Vec<String> = (1..=self.n).map(|i| format!("b{i}")).collect();
        let fv = variables(&full);
        let mut h = Polynomial::constant(fv.clone(), -lambda);
        for &q in states {
            h = &h + &Polynomial::var(fv.clone(), q);
        }
        eliminate_last(&h, self.n)
    }

    fn time_window(&self, from: f64) -> Vec<Polynomial> {
        let t = self.t();
        vec![&t - &Polynomial::constant(self.vars.clone(), from), &Polynomial::constant(self.vars.clone(), f64::from(self.horizon)) - &t]
    }

    /// Generator `>= 0` describing unsafe piece `piece` (closed).
    fn unsafe_generator(&self, piece: usize) -> Polynomial {
        match self.property {
            UnsafeSet::Safety { .. } => self.unsafe_mass(),
            UnsafeSet::Optimality { .. } => &self.lift(&self.reward(piece)) - &self.tube(),
        }
    }

    /// `-h >= 0` on the domain of piece `piece`, showing the strict unsafe set is empty.
    fn vacuity_constraint(&self, piece: usize) -> PositivityConstraint {
        let h = self.unsafe_generator(piece);
        let (vars, mut gens) = match self.property {
            UnsafeSet::Safety { .. } => (self.xvars.clone(), simplex(&self.xvars, self.k)),
            UnsafeSet::Optimality { .. } => {
                let mut g = simplex(&self.vars, self.k);
                g.extend(self.time_window(0.0));
                (self.vars.clone(), g)
            }
        };
        gens = with_products(gens, self.product_degree);
        let target = LinPoly::from_poly(&(-&h).in_variables(&vars).expect("generator variables"));
        PositivityConstraint::new(format!("vacuous[{piece}]"), target, gens)
    }

    fn vacuity_constraints(&self, vacuous: &[bool]) -> Vec<PositivityConstraint> {
        vacuous.iter().enumerate().filter(|(_, v)| **v).map(|(i, _)| self.vacuity_constraint(i)).collect()
    }

    fn piece_relevant(&self, piece: usize, region: Option<usize>) -> bool {
        match (self.property, &self.regions, region) {
            (UnsafeSet::Optimality { .. }, Some(r), Some(alpha)) => r.actions[alpha] == piece,
            _ => true,
        }
    }

    fn layout(&self, vacuous: &[bool]) -> Vec<Cond> {
        let mut out = Vec::new();
        let regions: Vec<Option<usize>> = match &self.regions {
            None => vec![None],
            Some(r) => (0..r.len()).map(Some).collect(),
        };
        if matches!(self.initial, InitialSet::Polytope(_)) {
            for f in 0..self.num_functions() {
                out.push(Cond::Init { func: f });
            }
        }
        for (func, &region) in regions.iter().enumerate() {
            for piece in 0..vacuous.len() {
                if !vacuous[piece] && self.piece_relevant(piece, region) {
                    out.push(Cond::Unsafe { func, piece, region });
                }
            }
        }
        for (src, &region) in regions.iter().enumerate() {
            for (branch, br) in self.branches.iter().enumerate() {
                match (&self.regions, region) {
                    (Some(r), Some(alpha)) => {
                        if br.action != r.actions[alpha] {
                            continue;
                        }
                        for beta in 0..r.len() {
                            out.push(Cond::Decrease { src, dst: beta, branch, region, succ: Some(beta) });
                        }
                    }
                    _ => out.push(Cond::Decrease { src, dst: src, branch, region: None, succ: None }),
                }
            }
        }
        out
    }

    fn region_generators(&self, region: Option<usize>, vars: &Variables) -> Vec<Polynomial> {
        match (&self.regions, region) {
            (Some(r), Some(alpha)) => r.generators(alpha, vars),
            _ => Vec::new(),
        }
    }

    fn constraints(&self, layout: &[Cond], funcs: &[Unknown]) -> Vec<PositivityConstraint> {
        let tau = f64::from(self.horizon);
        let ti = self.k;
        let d = self.degree;
        let mut out = Vec::new();
        for cond in layout {
            match *cond {
                Cond::Init { func } => {
                    let InitialSet::Polytope(gs) = self.initial else { unreachable!("polytope only") };
                    let zero = Polynomial::constant(self.xvars.clone(), 0.0);
                    let target = funcs[func].map(&self.xvars, |m| -&m.substitute(ti, &zero.in_variables(m.vars()).unwrap()));
                    let mut gens = simplex(&self.xvars, self.k);
                    gens.extend(gs.iter().map(|g| eliminate_last(g, self.n).in_variables(&self.xvars).expect("affine over beliefs")));
                    let gens = with_products(gens, self.product_degree);
                    out.push(PositivityConstraint::new(format!("init[{func}]"), target, gens).with_margin(self.margin));
                }
                Cond::Unsafe { func, piece, region } => match self.property {
                    UnsafeSet::Safety { .. } => {
                        let at_tau = Polynomial::constant(self.vars.clone(), tau);
                        let target = funcs[func].map(&self.xvars, |m| m.substitute(ti, &at_tau));
                        let mut gens = simplex(&self.xvars, self.k);
                        gens.push(self.unsafe_mass());
                        gens.extend(self.region_generators(region, &self.xvars));
                        let gens = with_products(gens, self.product_degree);
                        out.push(PositivityConstraint::new(format!("unsafe[{func}]"), target, gens).with_margin(self.margin));
                    }
                    UnsafeSet::Optimality { .. } => {
                        let target = funcs[func].identity(&self.vars);
                        let mut gens = simplex(&self.vars, self.k);
                        gens.extend(self.time_window(0.0));
                        gens.push(self.unsafe_generator(piece));
                        gens.extend(self.region_generators(region, &self.vars));
                        let gens = with_products(gens, self.product_degree);
                        out.push(PositivityConstraint::new(format!("tube[{func},a{piece}]"), target, gens).with_margin(self.margin));
                    }
                },
                Cond::Decrease { src, dst, branch, region, succ } => {
                    let f = &self.branches[branch].map;
                    let nd = self.lift(&f.denominator().pow(d));
                    let prev = &self.t() - &Polynomial::constant(self.vars.clone(), 1.0);
                    let mut target = funcs[src].map(&self.vars, |m| &m.substitute(ti, &prev) * &nd);
                    target.add_linpoly(&funcs[dst].map(&self.vars, |m| compose_cleared_with_degree(m, f, d)), -1.0);
                    let mut gens = simplex(&self.vars, self.k);
                    gens.extend(self.time_window(1.0));
                    gens.extend(self.region_generators(region, &self.vars));
                    if let (Some(r), Some(beta)) = (&self.regions, succ) {
                        gens.extend(r.successor_generators(beta, f, &self.vars));
                    }
                    let gens = with_products(gens, self.product_degree);
                    let br = &self.branches[branch];
                    let label = format!("decrease[{src}->{dst},a{}z{}]", br.action, br.observation);
                    out.push(PositivityConstraint::new(label, target, gens));
                }
            }
        }
        out
    }

    fn basis(&self) -> Vec<poly_algebra::Monomial> {
        monomial_basis(self.k + 1, self.degree).into_iter().filter(|m| m.exponent(self.k) <= self.time_degree).collect()
    }

    fn builder(&self, opts: &CertifierOptions) -> ProgramBuilder {
        ProgramBuilder::new(PsatzOptions { form: opts.form, degree_bound: Some(2 * self.degree) })
    }

    /// Tries to show each unsafe piece is empty; returns flags and witnesses.
    fn vacuity(&self, opts: &CertifierOptions) -> Result<(Vec<bool>, Vec<PsatzWitness>), CertError> {
        let mut flags = Vec::new();
        let mut wits = Vec::new();
        for piece in 0..self.property.pieces() {
            let mut b = self.builder(opts);
            b.add_positivity(&self.vacuity_constraint(piece))?;
            match solve(&b, &opts.solver)?.map(|x| b.witnesses(&x)).filter(|w| witnesses_hold(w)) {
                Some(w) => {
                    flags.push(true);
                    wits.extend(w);
                }
                None => flags.push(false),
            }
        }
        Ok((flags, wits))
    }

    /// Program for `num_functions()` barrier functions.
    fn synthesis_program(&self, layout: &[Cond], opts: &CertifierOptions) -> Result<(ProgramBuilder, Vec<DecisionPolynomial>), CertError> {
        let mut b = self.builder(opts);
        let basis = self.basis();
        let decs: Vec<_> = (0..self.num_functions()).map(|i| b.decision_polynomial(&format!("B{i}"), &self.vars, basis.clone())).collect();
        if let InitialSet::Point(b0) = self.initial {
            let f0 = self.initial_function();
            let mut x = to_eliminated(b0);
            x.push(0.0);
            let mut row = LinExpr::constant(self.margin);
            for (m, &id) in decs[f0].basis.iter().zip(&decs[f0].ids) {
                row.add_term(id, m.eval(&x));
            }
            b.add_row("init", &row, Relation::Le);
        }
        let funcs: Vec<Unknown> = decs.iter().map(Unknown::Decision).collect();
        for c in self.constraints(layout, &funcs) {
            b.add_positivity(&c)?;
        }
        Ok((b, decs))
    }

    fn synthesize(&self, layout: &[Cond], opts: &CertifierOptions) -> Result<Option<Synthesized>, CertError> {
        let (b, decs) = self.synthesis_program(layout, opts)?;
        let Some(x) = solve(&b, &opts.solver)? else { return Ok(None) };
        let witnesses = b.witnesses(&x);
        if !witnesses_hold(&witnesses) {
            return Ok(None);
        }
        Ok(Some((decs.iter().map(|d| d.value(&x)).collect(), witnesses)))
    }
}

/// Largest unsafe mass `sum_{q in states} b(q)` over the initial set, by LP
/// for polytopes; also cross-checked on Dirichlet samples.
pub fn overlap_mass(initial: &InitialSet, n: usize, states: &[usize]) -> Result<f64, CertError> {
    match initial {
        InitialSet::Point(b) => Ok(states.iter().map(|&q| b[q]).sum()),
        InitialSet::Polytope(gs) => {
            let mut lp = LinearProgram::new();
            let ids: Vec<usize> = (0..n).map(|i| lp.add_var(format!("b{}", i + 1), VarKind::NonNegative)).collect();
            lp.add_constraint("simplex", ids.iter().map(|&i| (i, 1.0)), Relation::Eq, 1.0);
            for (j, g) in gs.iter().enumerate() {
                let g = g.in_variables(&pomdp_core::full_belief_vars(n)).map_err(|e| CertError::InvalidInput(e.to_string()))?;
                let mut coeffs = Vec::new();
                let mut constant = 0.0;
                for (m, &c) in g.terms() {
                    match (0..n).find(|&i| m.exponent(i) == 1) {
                        Some(i) => coeffs.push((ids[i], c)),
                        None => constant += c,
                    }
                }
                lp.add_constraint(format!("g{j}"), coeffs, Relation::Ge, -constant);
            }
            lp.set_objective(states.iter().map(|&q| (ids[q], -1.0)));
            let sol = lp_core::solve(&lp, &SolveOptions::default())?;
            if sol.status != Status::Feasible {
                return Err(CertError::InvalidInput("initial polytope is empty".into()));
            }
            let mut best = -sol.objective_value;
            for b in dirichlet_sample(n, 1.0, 1000, 0) {
                let inside = gs.iter().all(|g| g.eval(&b).is_ok_and(|v| v >= 0.0));
                if inside {
                    best = best.max(states.iter().map(|&q| b[q]).sum());
                }
            }
            Ok(best)
        }
    }
}

/// Margin of the initial, unsafe and tube conditions during synthesis.
/// The conditions are invariant under `B -> k*B + c` with `k > 0`, so any
/// strict barrier can be rescaled to meet unit margins, and the solver
/// tolerance stays small against the certificate's scale.
const SYNTHESIS_MARGIN: f64 = 1.0;

#[allow(clippy::too_many_arguments)]
fn run(
    pomdp: &Pomdp,
    initial: &InitialSet,
    property: &UnsafeSet,
    horizon: u32,
    degree: u32,
    mode: BarrierMode,
    policy: Option<&PolicyPartition>,
    opts: &CertifierOptions,
) -> Result<BarrierCertificate, CertError> {
    let policy = match mode {
        BarrierMode::PerPartition => Some(policy.ok_or_else(|| CertError::InvalidInput("partition mode needs a policy".into()))?),
        _ => None,
    };
    let ctx = Ctx::new(pomdp, policy, property, initial, horizon, degree, SYNTHESIS_MARGIN, opts.product_degree, opts.time_degree)?;
    let (vacuous, mut witnesses) = ctx.vacuity(opts)?;
    let layout = ctx.layout(&vacuous);
    let programs = match mode {
        BarrierMode::PerActionHull => pomdp.num_actions(),
        _ => 1,
    };
    let solved: Vec<Option<(Vec<Polynomial>, Vec<PsatzWitness>)>> =
        (0..programs).into_par_iter().map(|_| ctx.synthesize(&layout, opts)).collect::<Result<_, _>>()?;
    let mut functions = Vec::new();
    for (i, s) in solved.into_iter().enumerate() {
        let Some((fs, ws)) = s else { return Err(CertError::NotFound { degree }) };
        for (j, f) in fs.into_iter().enumerate() {
            let scope = match mode {
                BarrierMode::Monolithic => Scope::All,
                BarrierMode::PerActionHull => Scope::Action(i),
                BarrierMode::PerPartition => Scope::Region(j),
            };
            functions.push((f, scope));
        }
        witnesses.extend(ws);
    }
    Ok(BarrierCertificate {
        mode,
        degree,
        horizon,
        property: property.clone(),
        initial: initial.clone(),
        functions,
        policy: policy.cloned(),
        margin: SYNTHESIS_MARGIN,
        product_degree: opts.product_degree,
        time_degree: opts.time_degree,
        vacuous,
        witnesses,
    })
}

/// Certifies that no execution reaches `sum_{q in states} b_tau(q) > lambda`.
#[allow(clippy::too_many_arguments)]
pub fn verify_safety(
    pomdp: &Pomdp,
    initial: &InitialSet,
    states: &[usize],
    lambda: f64,
    horizon: u32,
    degree: u32,
    mode: BarrierMode,
    policy: Option<&PolicyPartition>,
    opts: &CertifierOptions,
) -> Result<BarrierCertificate, CertError> {
    let mass = overlap_mass(initial, pomdp.num_states(), states)?;
    if mass > lambda {
        return Err(CertError::Overlap { mass, lambda });
    }
    let property = UnsafeSet::Safety { states: states.to_vec(), lambda };
    run(pomdp, initial, &property, horizon, degree, mode, policy, opts)
}

/// Certifies `sum_{s=0}^{horizon} r(b_s, a_s) <= gamma` along every
/// execution through the per-step tube `tube(t)`; the default tube is the
/// constant `gamma / (horizon + 1)`.
#[allow(clippy::too_many_arguments)]
pub fn verify_optimality(
    pomdp: &Pomdp,
    initial: &InitialSet,
    rewards: &[Vec<f64>],
    gamma: f64,
    tube: Option<&Polynomial>,
    horizon: u32,
    degree: u32,
    mode: BarrierMode,
    policy: Option<&PolicyPartition>,
    opts: &CertifierOptions,
) -> Result<BarrierCertificate, CertError> {
    let tv = variables(&["t"]);
    let tube = match tube {
        Some(p) => p.in_variables(&tv).map_err(|_| CertError::InvalidInput("tube must be a polynomial in t".into()))?,
        None => Polynomial::constant(tv.clone(), gamma / f64::from(horizon + 1)),
    };
    let sum: f64 = (0..=horizon).map(|s| tube.eval(&[f64::from(s)]).expect("univariate")).sum();
    if sum > gamma + 1e-12 * gamma.abs().max(1.0) {
        return Err(CertError::TubeViolation { sum, gamma });
    }
    let property = UnsafeSet::Optimality { rewards: rewards.to_vec(), gamma, tube };
    run(pomdp, initial, &property, horizon, degree, mode, policy, opts)
}

/// Builds a certificate for given barrier functions by solving only for
/// the Psatz multipliers. `functions` follow the layout of `mode`: one for
/// monolithic, one per action, or one per policy region.
#[allow(clippy::too_many_arguments)]
pub fn certify_barrier_functions(
    pomdp: &Pomdp,
    initial: &InitialSet,
    property: &UnsafeSet,
    horizon: u32,
    mode: BarrierMode,
    policy: Option<&PolicyPartition>,
    functions: Vec<(Polynomial, Scope)>,
    opts: &CertifierOptions,
) -> Result<BarrierCertificate, CertError> {
    let n = pomdp.num_states();
    let policy = if mode == BarrierMode::PerPartition { policy } else { None };
    let expected = match (mode, policy) {
        (BarrierMode::Monolithic, _) => 1,
        (BarrierMode::PerActionHull, _) => pomdp.num_actions(),
        (BarrierMode::PerPartition, Some(p)) => p.regions().len() + 1,
        (BarrierMode::PerPartition, None) => return Err(CertError::InvalidInput("partition mode needs a policy".into())),
    };
    if functions.len() != expected {
        return Err(CertError::InvalidInput(format!("mode needs {expected} functions, got {}", functions.len())));
    }
    let mut names: Vec<String> = pomdp_core::belief_vars(n).iter().cloned().collect();
    names.push("t".into());
    let vars = variables(&names);
    let functions = functions
        .into_iter()
        .map(|(f, s)| {
            f.in_variables(&vars)
                .map(|f| (f, s))
                .map_err(|_| CertError::InvalidInput(format!("barrier `{f}` must use b1..b{} and t", n - 1)))
        })
        .collect::<Result<Vec<_>, _>>()?;
    let k = n - 1;
    let degree = functions
        .iter()
        .flat_map(|(f, _)| f.terms().map(|(m, _)| (0..k).map(|i| m.exponent(i)).sum::<u32>()).collect::<Vec<_>>())
        .max()
        .unwrap_or(0)
        .max(1);
    let time_degree = functions.iter().map(|(f, _)| f.degree_in(k)).max().unwrap_or(0);
    if let UnsafeSet::Safety { states, lambda } = property {
        let mass = overlap_mass(initial, n, states)?;
        if mass > *lambda {
            return Err(CertError::Overlap { mass, lambda: *lambda });
        }
    }
    let mut cert = BarrierCertificate {
        mode,
        degree,
        horizon,
        property: property.clone(),
        initial: initial.clone(),
        functions,
        policy: policy.cloned(),
        margin: opts.margin,
        product_degree: opts.product_degree,
        time_degree,
        vacuous: Vec::new(),
        witnesses: Vec::new(),
    };
    let ctx = cert.context(pomdp)?;
    let (vacuous, mut witnesses) = ctx.vacuity(opts)?;
    let layout = ctx.layout(&vacuous);
    let width = cert.program_width();
    for chunk in cert.functions.chunks(width) {
        let funcs: Vec<Unknown> = chunk.iter().map(|(f, _)| Unknown::Known(f)).collect();
        if let InitialSet::Point(b0) = &cert.initial {
            let mut x = to_eliminated(b0);
            x.push(0.0);
            let v = funcs[ctx.initial_function()].known().expect("known").eval(&x).expect("dimension");
            if v > -cert.margin {
                return Err(CertError::NotFound { degree });
            }
        }
        let mut b = ctx.builder(opts);
        for c in ctx.constraints(&layout, &funcs) {
            b.add_positivity(&c)?;
        }
        let Some(x) = solve(&b, &opts.solver)? else { return Err(CertError::NotFound { degree }) };
        let found = b.witnesses(&x);
        if !witnesses_hold(&found) {
            return Err(CertError::NotFound { degree });
        }
        witnesses.extend(found);
    }
    drop(ctx);
    cert.vacuous = vacuous;
    cert.witnesses = witnesses;
    Ok(cert)
}

/// The synthesis program of a barrier search after emptiness checks on
/// the unsafe pieces; in per-action mode every action gets this program.
#[allow(clippy::too_many_arguments)]
pub fn barrier_program(
    pomdp: &Pomdp,
    initial: &InitialSet,
    property: &UnsafeSet,
    horizon: u32,
    degree: u32,
    mode: BarrierMode,
    policy: Option<&PolicyPartition>,
    opts: &CertifierOptions,
) -> Result<LinearProgram, CertError> {
    let policy = if mode == BarrierMode::PerPartition {
        Some(policy.ok_or_else(|| CertError::InvalidInput("partition mode needs a policy".into()))?)
    } else {
        None
    };
    let ctx = Ctx::new(pomdp, policy, property, initial, horizon, degree, SYNTHESIS_MARGIN, opts.product_degree, opts.time_degree)?;
    let (vacuous, _) = ctx.vacuity(opts)?;
    let layout = ctx.layout(&vacuous);
    Ok(ctx.synthesis_program(&layout, opts)?.0.program().clone())
}
