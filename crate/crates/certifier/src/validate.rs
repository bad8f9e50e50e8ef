use poly_algebra::Polynomial;
use pomdp_core::{dirichlet_sample, sample_trajectories, stream_rng, to_eliminated, ActionRegime, Belief, Pomdp, Trajectory};
use psatz_compiler::{check_identity, PositivityConstraint, PsatzWitness};
use rand::Rng;

use crate::barrier::{BarrierCertificate, BarrierMode, InitialSet, UnsafeSet};
use crate::certificate::Certificate;
use crate::common::IDENTITY_TOL;
use crate::reach::{ReachCertificate, ReachMode};
use crate::CertError;

/// Largest identity residual coefficient accepted.
/// Slack allowed on sampled margins and trajectory checks.
const SAMPLE_TOL: f64 = 1e-8;
const REACH_HORIZON: usize = 50;

/// Summary of a successful validation.
#[derive(Clone, Debug, PartialEq)]
pub struct Evidence {
    pub identities: usize,
    pub max_residual: f64,
    /// Bound on `|target - margin*weight - sum s_j g_j|` over the domain,
    /// from the exact residual: l1 norm times the largest monomial value.
    pub residual_bound: f64,
    pub min_dominance_slack: f64,
    pub min_initial_margin: f64,
    pub samples: usize,
    pub worst_sample_margin: f64,
    pub trajectories: usize,
    pub worst_trajectory_margin: f64,
}

impl Evidence {
    pub fn summary_lines(&self) -> Vec<String> {
        vec![
            format!("identities {} max-residual {:e} residual-bound {:e}", self.identities, self.max_residual, self.residual_bound),
            format!("min-dominance-slack {:e}", self.min_dominance_slack),
            format!("min-initial-margin {:e}", self.min_initial_margin),
            format!("samples {} worst-sample-margin {:e}", self.samples, self.worst_sample_margin),
            format!("trajectories {} worst-trajectory-margin {:e}", self.trajectories, self.worst_trajectory_margin),
        ]
    }
}

fn fail(reason: impl Into<String>, point: Option<Vec<f64>>) -> CertError {
    CertError::ValidationFailure { reason: reason.into(), point }
}

fn eval(p: &Polynomial, x: &[f64]) -> f64 {
    p.eval(x).expect("point dimension matches polynomial")
}

struct Checks {
    ev: Evidence,
}

impl Checks {
    fn new() -> Self {
        Checks {
            ev: Evidence {
                identities: 0,
                max_residual: 0.0,
                residual_bound: 0.0,
                min_dominance_slack: f64::INFINITY,
                min_initial_margin: f64::INFINITY,
                samples: 0,
                worst_sample_margin: f64::INFINITY,
                trajectories: 0,
                worst_trajectory_margin: f64::INFINITY,
            },
        }
    }

    /// Checks the stored Gram matrices against the recomputed constraint.
    /// `monomial_max` bounds every monomial on the constraint's domain.
    fn identity(&mut self, c: &PositivityConstraint, w: &PsatzWitness, monomial_max: f64) -> Result<(), CertError> {
        let target = c.target.as_constant().ok_or_else(|| fail(format!("{}: constraint still has unknowns", c.label), None))?;
        if w.label != c.label {
            return Err(fail(format!("witness `{}` found where `{}` was expected", w.label, c.label), None));
        }
        if w.multipliers.len() != c.generators.len() {
            return Err(fail(
                format!("{}: witness has {} multipliers for {} generators", c.label, w.multipliers.len(), c.generators.len()),
                None,
            ));
        }
        let weight = c.margin_weight.clone().unwrap_or_else(|| Polynomial::constant(target.vars().clone(), 1.0));
        let rebuilt = PsatzWitness {
            label: c.label.clone(),
            target,
            margin: c.margin,
            margin_weight: weight,
            generators: c.generators.clone(),
            s0: w.s0.clone(),
            multipliers: w.multipliers.clone(),
        };
        let r = check_identity(&rebuilt);
        self.ev.identities += 1;
        self.ev.max_residual = self.ev.max_residual.max(r.max_abs_residual);
        self.ev.residual_bound = self.ev.residual_bound.max(r.l1_residual * monomial_max);
        self.ev.min_dominance_slack = self.ev.min_dominance_slack.min(r.min_dominance_slack);
        if !r.diagonally_dominant {
            return Err(fail(format!("{}: Gram matrix is not diagonally dominant", c.label), None));
        }
        if !r.passes(IDENTITY_TOL) {
            return Err(fail(format!("{}: identity residual {:e} exceeds {:e}", c.label, r.max_abs_residual, IDENTITY_TOL), None));
        }
        Ok(())
    }

    /// Evaluates the constraint on sampled points of its domain.
    fn sample(&mut self, c: &PositivityConstraint, points: &[Vec<f64>]) -> Result<(), CertError> {
        let target = c.target.as_constant().expect("checked by identity");
        for x in points {
            if c.generators.iter().any(|g| eval(g, x) < 0.0) {
                continue;
            }
            let w = c.margin_weight.as_ref().map_or(1.0, |p| eval(p, x));
            let m = eval(&target, x) - c.margin * w;
            self.ev.samples += 1;
            self.ev.worst_sample_margin = self.ev.worst_sample_margin.min(m);
            if m < -SAMPLE_TOL {
                return Err(fail(format!("{}: margin {m:e} at a sampled point", c.label), Some(x.clone())));
            }
        }
        Ok(())
    }

    fn initial(&mut self, margins: &[f64]) -> Result<(), CertError> {
        for &m in margins {
            self.ev.min_initial_margin = self.ev.min_initial_margin.min(m);
            if m < -SAMPLE_TOL {
                return Err(fail(format!("initial condition violated by {m:e}"), None));
            }
        }
        Ok(())
    }

    fn trajectory_margin(&mut self, m: f64, reason: impl FnOnce() -> String, b: &Belief) -> Result<(), CertError> {
        self.ev.worst_trajectory_margin = self.ev.worst_trajectory_margin.min(m);
        if m < -SAMPLE_TOL {
            return Err(fail(reason(), Some(b.to_vec())));
        }
        Ok(())
    }

    fn run<'a>(
        &mut self,
        constraints: &[PositivityConstraint],
        witnesses: &[PsatzWitness],
        points: impl Fn(usize) -> &'a [Vec<f64>],
        monomial_max: f64,
    ) -> Result<(), CertError> {
        if constraints.len() != witnesses.len() {
            return Err(fail(format!("certificate has {} witnesses, the model needs {}", witnesses.len(), constraints.len()), None));
        }
        for (c, w) in constraints.iter().zip(witnesses) {
            self.identity(c, w, monomial_max)?;
        }
        for c in constraints {
            self.sample(c, points(c.target.vars().len()))?;
        }
        Ok(())
    }
}

/// Sample points in eliminated coordinates, optionally with a trailing
/// time coordinate uniform on `[0, horizon]`.
fn domain_points(n: usize, count: usize, seed: u64, horizon: Option<u32>) -> Vec<Vec<f64>> {
    let mut rng = stream_rng(seed, 1);
    dirichlet_sample(n, 1.0, count, seed)
        .iter()
        .map(|b| {
            let mut x = to_eliminated(b);
            if let Some(tau) = horizon {
                x.push(rng.random_range(0.0..=f64::from(tau)));
            }
            x
        })
        .collect()
}

fn validate_reach(c: &ReachCertificate, pomdp: &Pomdp, n_samples: usize, seed: u64) -> Result<Evidence, CertError> {
    let (constraints, init) = c.recompute(pomdp)?;
    let mut ch = Checks::new();
    let pts = domain_points(c.num_states(), n_samples, seed, None);
    ch.run(&constraints, &c.witnesses, |_| &pts, 1.0)?;
    ch.initial(&init)?;
    let regime = match (c.mode, &c.policy) {
        (ReachMode::PerPartition, Some(p)) => ActionRegime::Policy(p),
        _ => ActionRegime::Uniform,
    };
    let runs = sample_trajectories(pomdp, &c.initial, regime, REACH_HORIZON, trajectory_count(n_samples), seed)?;
    for tr in &runs {
        ch.ev.trajectories += 1;
        for b in &tr.beliefs {
            ch.trajectory_margin(c.membership_margin(b), || "simulated belief outside the certified set".into(), b)?;
        }
    }
    Ok(ch.ev)
}

fn trajectory_count(n_samples: usize) -> usize {
    (n_samples / 10).clamp(1, 1000)
}

/// Initial beliefs to simulate from.
fn initial_points(initial: &InitialSet, n: usize, count: usize, seed: u64) -> Vec<Belief> {
    match initial {
        InitialSet::Point(b) => vec![b.clone()],
        InitialSet::Polytope(gs) => dirichlet_sample(n, 1.0, count * 10, seed ^ 0x5eed)
            .into_iter()
            .filter(|b| gs.iter().all(|g| eval(g, b) >= 0.0))
            .take(count)
            .collect(),
    }
}

type Piece<'a> = Box<dyn Fn(f64, &[f64]) -> f64 + 'a>;

fn check_barrier_run(ch: &mut Checks, c: &BarrierCertificate, tr: &Trajectory, pomdp: &Pomdp) -> Result<(), CertError> {
    let steps = tr.len().min(c.horizon as usize);
    let pieces: Vec<Piece<'_>> = match c.mode {
        BarrierMode::PerActionHull => {
            (0..c.functions.len()).map(|i| Box::new(move |t, b: &[f64]| c.eval_function(i, t, b)) as Box<_>).collect()
        }
        _ => vec![Box::new(|t, b: &[f64]| c.value(t, b))],
    };
    for f in &pieces {
        for t in 1..=steps {
            let prev = f((t - 1) as f64, &tr.beliefs[t - 1]);
            let cur = f(t as f64, &tr.beliefs[t]);
            ch.trajectory_margin(prev - cur, || format!("barrier increases at step {t}"), &tr.beliefs[t])?;
        }
    }
    match &c.property {
        UnsafeSet::Safety { states, lambda } => {
            let b = &tr.beliefs[steps];
            let mass: f64 = states.iter().map(|&q| b[q]).sum();
            ch.trajectory_margin(lambda - mass, || format!("unsafe mass {mass} exceeds {lambda} at the horizon"), b)?;
        }
        UnsafeSet::Optimality { rewards, gamma, tube } => {
            let r = |b: &Belief, a: usize| (0..b.len()).map(|q| b[q] * rewards[q][a]).sum::<f64>();
            let mut total = 0.0;
            for s in 0..=steps {
                let b = &tr.beliefs[s];
                let got = if s < steps {
                    r(b, tr.actions[s])
                } else {
                    (0..pomdp.num_actions()).map(|a| r(b, a)).fold(f64::NEG_INFINITY, f64::max)
                };
                let bound = eval(tube, &[s as f64]);
                ch.trajectory_margin(bound - got, || format!("reward {got} above the tube {bound} at step {s}"), b)?;
                total += got;
            }
            ch.trajectory_margin(gamma - total, || format!("cumulative reward {total} exceeds {gamma}"), &tr.beliefs[steps])?;
        }
    }
    Ok(())
}

fn validate_barrier(c: &BarrierCertificate, pomdp: &Pomdp, n_samples: usize, seed: u64) -> Result<Evidence, CertError> {
    let (constraints, init) = c.recompute(pomdp)?;
    let mut ch = Checks::new();
    let n = c.num_states();
    let x_pts = domain_points(n, n_samples, seed, None);
    let xt_pts = domain_points(n, n_samples, seed, Some(c.horizon));
    let tmax = f64::from(c.horizon).powi(c.time_degree as i32).max(1.0);
    ch.run(&constraints, &c.witnesses, |nv| if nv == n { &xt_pts } else { &x_pts }, tmax)?;
    ch.initial(&init)?;
    let regime = match (c.mode, &c.policy) {
        (BarrierMode::PerPartition, Some(p)) => ActionRegime::Policy(p),
        _ => ActionRegime::Uniform,
    };
    let count = trajectory_count(n_samples);
    let starts = initial_points(&c.initial, n, count, seed);
    for (i, b0) in starts.iter().enumerate() {
        let per_start = (count / starts.len()).max(1);
        for tr in sample_trajectories(pomdp, b0, regime, c.horizon as usize, per_start, seed.wrapping_add(i as u64))? {
            ch.ev.trajectories += 1;
            check_barrier_run(&mut ch, c, &tr, pomdp)?;
        }
    }
    Ok(ch.ev)
}

/// Re-derives every condition from the stored functions, checks the
/// stored identities in exact arithmetic, and probes the conditions on
/// `n_samples` random points and simulated runs.
pub fn validate_certificate(cert: &Certificate, pomdp: &Pomdp, n_samples: usize, seed: u64) -> Result<Evidence, CertError> {
    match cert {
        Certificate::Reach(c) => validate_reach(c, pomdp, n_samples, seed),
        Certificate::Barrier(c) => validate_barrier(c, pomdp, n_samples, seed),
    }
}
