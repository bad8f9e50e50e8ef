use lp_core::{LinearProgram, Relation, VarKind};
use poly_algebra::{compose_cleared_with_degree, monomial_basis, Polynomial, Variables};
use pomdp_core::{belief_vars, rational_maps, to_eliminated, Belief, BranchMap, PolicyPartition, Pomdp};
use psatz_compiler::{DecisionPolynomial, LinExpr, LinPoly, PositivityConstraint, ProgramBuilder, PsatzOptions, PsatzWitness};
use rayon::prelude::*;

use crate::common::{mean_expr, product, simplex, solve, with_products, witnesses_hold, Regions, Unknown};
use crate::{CertError, CertifierOptions, Scope};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ReachMode {
    /// One function for all actions.
    Single,
    /// One function per action; the set is `{max_a V_a <= level}`.
    PerAction,
    /// One function per policy region, read piecewise.
    PerPartition,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum ReachCondition {
    /// `V(b) <= level` implies `V(f(b)) <= level` for every branch.
    #[default]
    Invariance,
    /// `V(f(b)) - V(b) <= -margin` on `{V <= level}`.
    StrictDecrease,
}

/// Over-approximation of the beliefs reachable from `initial`.
#[derive(Clone, Debug)]
pub struct ReachCertificate {
    pub mode: ReachMode,
    pub condition: ReachCondition,
    pub degree: u32,
    pub level: f64,
    pub cap: f64,
    pub margin: f64,
    pub product_degree: u32,
    pub initial: Belief,
    /// Functions over the eliminated coordinates `b1..b_{n-1}`.
    pub functions: Vec<(Polynomial, Scope)>,
    /// Fixed S-procedure multipliers, one per transition condition in layout order.
    pub multipliers: Vec<Polynomial>,
    pub policy: Option<PolicyPartition>,
    pub witnesses: Vec<PsatzWitness>,
    pub rounds: usize,
    /// Sum over functions of their simplex mean.
    pub objective: f64,
}

impl ReachCertificate {
    pub fn num_states(&self) -> usize {
        self.initial.len()
    }

    /// The value compared against `level` at a full belief.
    pub fn value(&self, b: &[f64]) -> f64 {
        let x = to_eliminated(b);
        let eval = |p: &Polynomial| p.eval(&x).expect("belief dimension matches certificate");
        match self.mode {
            ReachMode::Single | ReachMode::PerAction => self.functions.iter().map(|(v, _)| eval(v)).fold(f64::NEG_INFINITY, f64::max),
            ReachMode::PerPartition => {
                let alpha = self.policy.as_ref().expect("partition certificate has a policy").region_index(b);
                eval(&self.functions[alpha].0)
            }
        }
    }

    /// `level - value(b)`; nonnegative inside the certified set.
    pub fn membership_margin(&self, b: &[f64]) -> f64 {
        self.level - self.value(b)
    }

    pub fn contains(&self, b: &[f64], tol: f64) -> bool {
        self.membership_margin(b) >= -tol
    }

    pub(crate) fn context<'a>(&'a self, pomdp: &'a Pomdp) -> Result<Ctx<'a>, CertError> {
        Ctx::new(pomdp, self.policy.as_ref(), self.degree, self.condition, self.level, self.cap, self.margin, self.product_degree)
    }

    /// Number of functions per independently solved program.
    pub(crate) fn program_width(&self) -> usize {
        match self.mode {
            ReachMode::PerAction => 1,
            _ => self.functions.len(),
        }
    }

    /// Constraints rebuilt from the stored functions and multipliers, in
    /// witness order, plus the initial-belief margins `level - V(b0)`.
    pub(crate) fn recompute(&self, pomdp: &Pomdp) -> Result<(Vec<PositivityConstraint>, Vec<f64>), CertError> {
        let ctx = self.context(pomdp)?;
        let layout = ctx.layout();
        let steps = layout.iter().filter(|c| matches!(c, Cond::Step { .. })).count();
        let width = self.program_width();
        let programs = self.functions.len() / width.max(1);
        if self.multipliers.len() != steps * programs {
            return Err(CertError::ValidationFailure { reason: "multiplier count does not match the model".into(), point: None });
        }
        let mut out = Vec::new();
        let mut init = Vec::new();
        for p in 0..programs {
            let funcs: Vec<Unknown> = self.functions[p * width..(p + 1) * width].iter().map(|(v, _)| Unknown::Known(v)).collect();
            let mults: Vec<Unknown> = self.multipliers[p * steps..(p + 1) * steps].iter().map(Unknown::Known).collect();
            out.extend(ctx.constraints(&layout, &funcs, &mults, None));
            let x0 = to_eliminated(&self.initial);
            let f0 = ctx.initial_function(&self.initial);
            init.push(self.level - funcs[f0].known().unwrap().eval(&x0).expect("dimension"));
        }
        Ok((out, init))
    }
}

#[derive(Clone, Debug)]
pub(crate) enum Cond {
    /// `V <= cap` on the whole simplex, bounding the objective even for empty regions.
    Cap {
        func: usize,
    },
    Step {
        src: usize,
        dst: usize,
        branch: usize,
        region: Option<usize>,
        succ: Option<usize>,
    },
}

pub(crate) struct Ctx<'a> {
    pub k: usize,
    pub vars: Variables,
    pub branches: Vec<BranchMap>,
    pub regions: Option<Regions>,
    pub policy: Option<&'a PolicyPartition>,
    pub degree: u32,
    pub condition: ReachCondition,
    pub level: f64,
    pub cap: f64,
    pub margin: f64,
    pub product_degree: u32,
}

impl<'a> Ctx<'a> {
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        pomdp: &Pomdp,
        policy: Option<&'a PolicyPartition>,
        degree: u32,
        condition: ReachCondition,
        level: f64,
        cap: f64,
        margin: f64,
        product_degree: u32,
    ) -> Result<Self, CertError> {
        if degree == 0 {
            return Err(CertError::InvalidInput("degree must be at least 1".into()));
        }
        if !(level > 0.0 && cap >= level) {
            return Err(CertError::InvalidInput("need 0 < level <= cap".into()));
        }
        let n = pomdp.num_states();
        Ok(Ctx {
            k: n - 1,
            vars: belief_vars(n),
            branches: rational_maps(pomdp),
            regions: policy.map(|p| Regions::from_policy(p, n)),
            policy,
            degree,
            condition,
            level,
            cap,
            margin,
            product_degree,
        })
    }

    pub fn num_functions(&self) -> usize {
        self.regions.as_ref().map_or(1, Regions::len)
    }

    pub fn layout(&self) -> Vec<Cond> {
        let mut out = Vec::new();
        match &self.regions {
            None => {
                out.push(Cond::Cap { func: 0 });
                for branch in 0..self.branches.len() {
                    out.push(Cond::Step { src: 0, dst: 0, branch, region: None, succ: None });
                }
            }
            Some(r) => {
                for alpha in 0..r.len() {
                    out.push(Cond::Cap { func: alpha });
                }
                for alpha in 0..r.len() {
                    for (branch, br) in self.branches.iter().enumerate() {
                        if br.action != r.actions[alpha] {
                            continue;
                        }
                        for beta in 0..r.len() {
                            out.push(Cond::Step { src: alpha, dst: beta, branch, region: Some(alpha), succ: Some(beta) });
                        }
                    }
                }
            }
        }
        out
    }

    /// Function whose sublevel set must contain the initial belief.
    pub fn initial_function(&self, b0: &Belief) -> usize {
        self.policy.map_or(0, |p| p.region_index(b0))
    }

    fn generators(&self, region: Option<usize>, succ: Option<(usize, usize)>) -> Vec<Polynomial> {
        let mut base = simplex(&self.vars, self.k);
        if let (Some(r), Some(alpha)) = (&self.regions, region) {
            base.extend(r.generators(alpha, &self.vars));
        }
        if let (Some(r), Some((branch, beta))) = (&self.regions, succ) {
            base.extend(r.successor_generators(beta, &self.branches[branch].map, &self.vars));
        }
        with_products(base, self.product_degree)
    }

    /// Positivity constraints of `layout`. `mults[i]` belongs to the `i`-th
    /// step condition. With `eps = Some(id)`, the step margins become
    /// `-x[id] * N^d` instead of the fixed margin.
    pub fn constraints(&self, layout: &[Cond], funcs: &[Unknown], mults: &[Unknown], eps: Option<usize>) -> Vec<PositivityConstraint> {
        let vars = &self.vars;
        let d = self.degree;
        let mut step = 0;
        let mut out = Vec::with_capacity(layout.len());
        for cond in layout {
            match *cond {
                Cond::Cap { func } => {
                    let mut target = LinPoly::from_poly(&Polynomial::constant(vars.clone(), self.cap));
                    target.add_linpoly(&funcs[func].identity(vars), -1.0);
                    let label = format!("cap[{func}]");
                    out.push(PositivityConstraint::new(label, target, self.generators(None, None)));
                }
                Cond::Step { src, dst, branch, region, succ } => {
                    let f = &self.branches[branch].map;
                    let nd = f.denominator().pow(d);
                    let composed = funcs[dst].map(vars, |m| compose_cleared_with_degree(m, f, d));
                    let level = Polynomial::constant(vars.clone(), self.level);
                    let mut slack = LinPoly::from_poly(&level);
                    slack.add_linpoly(&funcs[src].identity(vars), -1.0);
                    let mut target = match self.condition {
                        ReachCondition::Invariance => LinPoly::from_poly(&nd.scale(&self.level)),
                        ReachCondition::StrictDecrease => funcs[src].map(vars, |m| m * &nd),
                    };
                    target.add_linpoly(&composed, -1.0);
                    let p = &mults[step];
                    let skip = p.known().is_some_and(Polynomial::is_zero);
                    if !skip {
                        let ps = match (p.known(), funcs[src].known()) {
                            (Some(pk), _) => {
                                let mut e = LinPoly::from_poly(&pk.scale(&self.level));
                                e.add_linpoly(&product(&funcs[src], p, vars), -1.0);
                                e
                            }
                            (None, Some(v)) => p.map(vars, |m| m * &(&level - v)),
                            (None, None) => unreachable!("multiplier and function both unknown"),
                        };
                        target.add_linpoly(&ps, -1.0);
                    }
                    let label = format!("step[{src}->{dst},a{}z{}]", self.branches[branch].action, self.branches[branch].observation);
                    let gens = self.generators(region, succ.map(|b| (branch, b)));
                    let mut c = PositivityConstraint::new(label, target, gens);
                    match eps {
                        Some(id) => c.target.add_product(&nd, &LinExpr::var(id), -1.0),
                        None => c = c.with_margin(self.margin).with_margin_weight(nd),
                    }
                    out.push(c);
                    step += 1;
                }
            }
        }
        out
    }

    fn step_generators(&self, layout: &[Cond]) -> Vec<Vec<Polynomial>> {
        layout
            .iter()
            .filter_map(|c| match *c {
                Cond::Step { branch, region, succ, .. } => Some(self.generators(region, succ.map(|b| (branch, b)))),
                Cond::Cap { .. } => None,
            })
            .collect()
    }

    fn builder(&self, opts: &CertifierOptions) -> ProgramBuilder {
        ProgramBuilder::new(PsatzOptions { form: opts.form, degree_bound: Some(2 * self.degree) })
    }
}

/// Functions, witnesses and objective value of one synthesis round.
type Synthesized = (Vec<Polynomial>, Vec<PsatzWitness>, f64);

struct Solved {
    functions: Vec<Polynomial>,
    multipliers: Vec<Polynomial>,
    witnesses: Vec<PsatzWitness>,
    rounds: usize,
    objective: f64,
}

type Synthesis = (ProgramBuilder, Vec<DecisionPolynomial>, LinExpr);

/// Synthesis program with multipliers fixed: maximize the simplex mean of
/// the functions subject to the layout and the initial-belief rows.
fn synthesis_program(
    ctx: &Ctx,
    layout: &[Cond],
    b0: &Belief,
    mults: &[Polynomial],
    opts: &CertifierOptions,
) -> Result<Synthesis, CertError> {
    let mut b = ctx.builder(opts);
    let basis = monomial_basis(ctx.k, ctx.degree);
    let decs: Vec<_> = (0..ctx.num_functions()).map(|i| b.decision_polynomial(&format!("V{i}"), &ctx.vars, basis.clone())).collect();
    let funcs: Vec<Unknown> = decs.iter().map(Unknown::Decision).collect();
    let known: Vec<Unknown> = mults.iter().map(Unknown::Known).collect();
    let x0 = to_eliminated(b0);
    let f0 = ctx.initial_function(b0);
    let mut init = LinExpr::constant(-ctx.level);
    for (m, &id) in decs[f0].basis.iter().zip(&decs[f0].ids) {
        init.add_term(id, m.eval(&x0));
    }
    b.add_row("init", &init, Relation::Le);
    for c in ctx.constraints(layout, &funcs, &known, None) {
        b.add_positivity(&c)?;
    }
    let mut obj = LinExpr::default();
    for d in &decs {
        obj.add_scaled(&mean_expr(d, ctx.k), -1.0);
    }
    b.set_objective(&obj);
    Ok((b, decs, obj))
}

fn synthesize(
    ctx: &Ctx,
    layout: &[Cond],
    b0: &Belief,
    mults: &[Polynomial],
    opts: &CertifierOptions,
) -> Result<Option<Synthesized>, CertError> {
    let (b, decs, obj) = synthesis_program(ctx, layout, b0, mults, opts)?;
    let Some(x) = solve(&b, &opts.solver)? else { return Ok(None) };
    let values = decs.iter().map(|d| d.value(&x)).collect();
    Ok(Some((values, b.witnesses(&x), -obj.eval(&x))))
}

/// Multiplier refit with functions fixed: maximize the common step margin.
/// Returns the new multipliers when the margin reaches `opts.margin`.
fn refit(ctx: &Ctx, layout: &[Cond], functions: &[Polynomial], opts: &CertifierOptions) -> Result<Option<Vec<Polynomial>>, CertError> {
    let mut b = ctx.builder(opts);
    let basis = monomial_basis(ctx.k, ctx.degree);
    let gens = ctx.step_generators(layout);
    let decs: Vec<_> = (0..gens.len()).map(|i| b.decision_polynomial(&format!("p{i}"), &ctx.vars, basis.clone())).collect();
    let eps = b.add_var("eps", VarKind::Free);
    let mut cap = LinExpr::var(eps);
    cap.constant = -1.0;
    b.add_row("eps.cap", &cap, Relation::Le);
    for (i, (d, g)) in decs.iter().zip(&gens).enumerate() {
        let c = PositivityConstraint::new(format!("p{i}.nonneg"), d.to_linpoly(), g.clone());
        b.add_positivity(&c)?;
    }
    let funcs: Vec<Unknown> = functions.iter().map(Unknown::Known).collect();
    let mults: Vec<Unknown> = decs.iter().map(Unknown::Decision).collect();
    let steps = ctx.constraints(layout, &funcs, &mults, Some(eps));
    for c in steps.iter().filter(|c| c.label.starts_with("step")) {
        b.add_positivity(c)?;
    }
    b.set_objective(&LinExpr::term(eps, -1.0));
    let Some(x) = solve(&b, &opts.solver)? else { return Ok(None) };
    // The synthesis step re-imposes the margin exactly, so rounding slack is harmless here.
    if x[eps] < opts.margin * (1.0 - 1e-6) {
        return Ok(None);
    }
    Ok(Some(decs.iter().map(|d| d.value(&x).pruned(0.0)).collect()))
}

fn alternate(ctx: &Ctx, b0: &Belief, opts: &CertifierOptions) -> Result<Solved, CertError> {
    let layout = ctx.layout();
    let steps = layout.iter().filter(|c| matches!(c, Cond::Step { .. })).count();
    let mut mults = vec![Polynomial::zero(ctx.vars.clone()); steps];
    let Some((mut funcs, mut wits, mut obj)) = synthesize(ctx, &layout, b0, &mults, opts)?.filter(|s| witnesses_hold(&s.1)) else {
        return Err(CertError::NotFound { degree: ctx.degree });
    };
    let mut rounds = 1;
    while rounds < opts.alternation.max_iters {
        let Some(new_mults) = refit(ctx, &layout, &funcs, opts)? else { break };
        let Some((f, w, o)) = synthesize(ctx, &layout, b0, &new_mults, opts)?.filter(|s| witnesses_hold(&s.1)) else { break };
        rounds += 1;
        let gain = o - obj;
        if gain < 0.0 {
            break;
        }
        (funcs, wits, obj, mults) = (f, w, o, new_mults);
        if gain < opts.alternation.tol {
            break;
        }
    }
    Ok(Solved { functions: funcs, multipliers: mults, witnesses: wits, rounds, objective: obj })
}

fn check_initial(pomdp: &Pomdp, b0: &Belief) -> Result<(), CertError> {
    if b0.len() != pomdp.num_states() {
        return Err(CertError::InvalidInput(format!("initial belief has {} entries", b0.len())));
    }
    Ok(())
}

fn certificate(mode: ReachMode, ctx: &Ctx, b0: &Belief, functions: Vec<(Polynomial, Scope)>, solved: Vec<Solved>) -> ReachCertificate {
    ReachCertificate {
        mode,
        condition: ctx.condition,
        degree: ctx.degree,
        level: ctx.level,
        cap: ctx.cap,
        margin: ctx.margin,
        product_degree: ctx.product_degree,
        initial: b0.clone(),
        functions,
        multipliers: solved.iter().flat_map(|s| s.multipliers.clone()).collect(),
        policy: ctx.policy.cloned(),
        rounds: solved.iter().map(|s| s.rounds).max().unwrap_or(0),
        objective: solved.iter().map(|s| s.objective).sum(),
        witnesses: solved.into_iter().flat_map(|s| s.witnesses).collect(),
    }
}

/// One function `V` with `V(b0) <= level` whose sublevel set is closed under
/// every branch `(a, z)`.
pub fn reach_single(
    pomdp: &Pomdp,
    b0: &Belief,
    degree: u32,
    condition: ReachCondition,
    opts: &CertifierOptions,
) -> Result<ReachCertificate, CertError> {
    check_initial(pomdp, b0)?;
    let ctx = Ctx::new(pomdp, None, degree, condition, opts.level, opts.cap, opts.margin, opts.product_degree)?;
    let s = alternate(&ctx, b0, opts)?;
    let functions = s.functions.iter().map(|v| (v.clone(), Scope::All)).collect();
    Ok(certificate(ReachMode::Single, &ctx, b0, functions, vec![s]))
}

/// One program per action `a`, each pairing `V_a` with every branch, solved
/// in parallel. The set is `{max_a V_a <= level}`.
pub fn reach_per_action(
    pomdp: &Pomdp,
    b0: &Belief,
    degree: u32,
    condition: ReachCondition,
    opts: &CertifierOptions,
) -> Result<ReachCertificate, CertError> {
    check_initial(pomdp, b0)?;
    let ctx = Ctx::new(pomdp, None, degree, condition, opts.level, opts.cap, opts.margin, opts.product_degree)?;
    let solved: Vec<Solved> = (0..pomdp.num_actions()).into_par_iter().map(|_| alternate(&ctx, b0, opts)).collect::<Result<_, _>>()?;
    let functions = solved.iter().enumerate().map(|(a, s)| (s.functions[0].clone(), Scope::Action(a))).collect();
    Ok(certificate(ReachMode::PerAction, &ctx, b0, functions, solved))
}

/// Piecewise certificate under a policy: `V_alpha` applies on region
/// `alpha`, and every branch from region `alpha` landing in region `beta`
/// must keep `V_beta <= level`.
pub fn reach_policy(
    pomdp: &Pomdp,
    b0: &Belief,
    policy: &PolicyPartition,
    degree: u32,
    opts: &CertifierOptions,
) -> Result<ReachCertificate, CertError> {
    check_initial(pomdp, b0)?;
    let ctx = Ctx::new(pomdp, Some(policy), degree, ReachCondition::Invariance, opts.level, opts.cap, opts.margin, opts.product_degree)?;
    let s = alternate(&ctx, b0, opts)?;
    let functions = s.functions.iter().enumerate().map(|(i, v)| (v.clone(), Scope::Region(i))).collect();
    Ok(certificate(ReachMode::PerPartition, &ctx, b0, functions, vec![s]))
}

/// The first synthesis program of a reach search, with all multipliers at
/// zero: single and per-action searches share it; a policy gives the
/// piecewise program.
pub fn reach_program(
    pomdp: &Pomdp,
    b0: &Belief,
    policy: Option<&PolicyPartition>,
    degree: u32,
    condition: ReachCondition,
    opts: &CertifierOptions,
) -> Result<LinearProgram, CertError> {
    check_initial(pomdp, b0)?;
    let condition = if policy.is_some() { ReachCondition::Invariance } else { condition };
    let ctx = Ctx::new(pomdp, policy, degree, condition, opts.level, opts.cap, opts.margin, opts.product_degree)?;
    let layout = ctx.layout();
    let steps = layout.iter().filter(|c| matches!(c, Cond::Step { .. })).count();
    let mults = vec![Polynomial::zero(ctx.vars.clone()); steps];
    Ok(synthesis_program(&ctx, &layout, b0, &mults, opts)?.0.program().clone())
}
