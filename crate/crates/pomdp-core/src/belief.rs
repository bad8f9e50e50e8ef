use std::ops::Deref;

use poly_algebra::{variables, Polynomial, RationalMap, Variables};

use crate::{Pomdp, PomdpError};

/// Observations with likelihood at most this are rejected by the filter.
pub const ZERO_LIKELIHOOD_TOL: f64 = 1e-12;

/// A point of the probability simplex over states.
#[derive(Clone, Debug, PartialEq)]
pub struct Belief(Vec<f64>);

impl Belief {
    /// Accepts entries `>= -1e-12` (clamped to 0) summing to `1 +- 1e-9`.
    pub fn new(probs: Vec<f64>) -> Result<Self, PomdpError> {
        if probs.is_empty() {
            return Err(PomdpError::InvalidBelief("empty".into()));
        }
        if let Some(v) = probs.iter().find(|v| !v.is_finite() || **v < -1e-12) {
            return Err(PomdpError::InvalidBelief(format!("entry {v}")));
        }
        let probs: Vec<f64> = probs.into_iter().map(|v| v.max(0.0)).collect();
        let s: f64 = probs.iter().sum();
        if (s - 1.0).abs() > 1e-9 {
            return Err(PomdpError::InvalidBelief(format!("sum {s}")));
        }
        Ok(Belief(probs))
    }

    pub fn uniform(n: usize) -> Self {
        Belief(vec![1.0 / n as f64; n])
    }

    pub fn vertex(n: usize, i: usize) -> Self {
        let mut v = vec![0.0; n];
        v[i] = 1.0;
        Belief(v)
    }

    /// Builds a belief from nonnegative weights by normalizing.
    pub fn normalized(weights: Vec<f64>) -> Result<Self, PomdpError> {
        let s: f64 = weights.iter().sum();
        if s.is_nan() || s <= 0.0 || weights.iter().any(|w| *w < 0.0) {
            return Err(PomdpError::InvalidBelief("weights must be nonnegative with positive sum".into()));
        }
        Ok(Belief(weights.into_iter().map(|w| w / s).collect()))
    }

    pub fn probs(&self) -> &[f64] {
        &self.0
    }
}

impl Deref for Belief {
    type Target = [f64];
    fn deref(&self) -> &[f64] {
        &self.0
    }
}

/// `P(z | b, a) = sum_q O(q, a, z) (T_a b)_q`.
pub fn likelihood(pomdp: &Pomdp, b: &[f64], a: usize, z: usize) -> f64 {
    let n = pomdp.num_states();
    let t = pomdp.transition(a);
    (0..n).map(|i| pomdp.o(i, a, z) * (0..n).map(|j| t[i][j] * b[j]).sum::<f64>()).sum()
}

/// Bayesian filter: predict with `T_a`, weight by `O(., a, z)`, normalize.
pub fn belief_update(pomdp: &Pomdp, b: &Belief, a: usize, z: usize) -> Result<Belief, PomdpError> {
    let n = pomdp.num_states();
    let t = pomdp.transition(a);
    let mut post: Vec<f64> = (0..n).map(|i| pomdp.o(i, a, z) * (0..n).map(|j| t[i][j] * b[j]).sum::<f64>()).collect();
    let den: f64 = post.iter().sum();
    if den <= ZERO_LIKELIHOOD_TOL {
        return Err(PomdpError::ZeroLikelihood { action: a, observation: z, likelihood: den });
    }
    for p in &mut post {
        *p = (*p / den).max(0.0);
    }
    let s: f64 = post.iter().sum();
    for p in &mut post {
        *p /= s;
    }
    Ok(Belief(post))
}

/// Names `b1..b_{n-1}` of the coordinates kept after eliminating
/// `b_n = 1 - sum b_i`.
pub fn belief_vars(n: usize) -> Variables {
    let names: Vec<String> = (1..n).map(|i| format!("b{i}")).collect();
    variables(&names)
}

/// First `n-1` coordinates of a belief.
pub fn to_eliminated(b: &[f64]) -> Vec<f64> {
    b[..b.len() - 1].to_vec()
}

/// Rewrites a polynomial in `b1..bn` over `b1..b_{n-1}` by substituting
/// `b_n = 1 - sum_{i<n} b_i`. Variables of `p` outside `b1..bn` are kept
/// after the belief coordinates.
pub fn eliminate_last(p: &Polynomial, n: usize) -> Polynomial {
    let full: Vec<String> = (1..=n).map(|i| format!("b{i}")).collect();
    let extra: Vec<String> = p.vars().iter().filter(|v| !full.contains(v)).cloned().collect();
    let mut all = full.clone();
    all.extend(extra.iter().cloned());
    let all_vars = variables(&all);
    let p = p.in_variables(&all_vars).expect("superset of variables");
    let mut kept: Vec<String> = full[..n - 1].to_vec();
    kept.extend(extra.iter().cloned());
    let kept_vars = variables(&kept);
    let var = |i: usize| Polynomial::var(kept_vars.clone(), i);
    let mut subs: Vec<Polynomial> = (0..n - 1).map(var).collect();
    let sum = subs.iter().fold(Polynomial::zero(kept_vars.clone()), |a, b| &a + b);
    subs.push(&Polynomial::constant(kept_vars.clone(), 1.0) - &sum);
    for k in 0..extra.len() {
        subs.push(var(n - 1 + k));
    }
    p.compose(&subs)
}

/// The rational belief map of one `(action, observation)` branch.
#[derive(Clone, Debug)]
pub struct BranchMap {
    pub action: usize,
    pub observation: usize,
    pub map: RationalMap,
}

/// `f_{a,z}(x) = M(x) / N(x)` in eliminated coordinates:
/// `M_q = O(q, a, z) (T_a b)_q` for `q < n-1` and `N = sum_q O(q, a, z) (T_a b)_q`.
/// Returns `None` when `N` vanishes on the whole simplex (impossible branch).
pub fn rational_map(pomdp: &Pomdp, a: usize, z: usize) -> Option<RationalMap> {
    let n = pomdp.num_states();
    let vars = belief_vars(n);
    let t = pomdp.transition(a);
    let predicted: Vec<Polynomial> = (0..n)
        .map(|i| {
            let mut terms = vec![(poly_algebra::Monomial::one(n - 1), t[i][n - 1])];
            for j in 0..n - 1 {
                terms.push((poly_algebra::Monomial::var(n - 1, j), t[i][j] - t[i][n - 1]));
            }
            Polynomial::from_terms(vars.clone(), terms)
        })
        .collect();
    let weighted: Vec<Polynomial> = predicted.iter().enumerate().map(|(i, p)| p.scale(&pomdp.o(i, a, z))).collect();
    let den = weighted.iter().fold(Polynomial::zero(vars.clone()), |acc, p| &acc + p);
    // N is affine and nonnegative on the simplex, so it vanishes identically
    // iff it vanishes at every vertex.
    let vertex_values = (0..n).map(|v| likelihood(pomdp, &Belief::vertex(n, v), a, z));
    if vertex_values.into_iter().all(|l| l <= 1e-15) {
        return None;
    }
    let nums = weighted[..n - 1].to_vec();
    Some(RationalMap::new(nums, den).expect("likelihood is nonnegative on the simplex"))
}

/// All possible branches, ordered by action then observation.
pub fn rational_maps(pomdp: &Pomdp) -> Vec<BranchMap> {
    let mut out = Vec::new();
    for a in 0..pomdp.num_actions() {
        for z in 0..pomdp.num_observations() {
            if let Some(map) = rational_map(pomdp, a, z) {
                out.push(BranchMap { action: a, observation: z, map });
            }
        }
    }
    out
}
