use std::collections::HashSet;

use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::Gamma;
use rayon::prelude::*;

use crate::{belief_update, Belief, PolicyPartition, Pomdp, PomdpError};

/// How actions are chosen during simulation.
#[derive(Clone, Copy, Debug)]
pub enum ActionRegime<'a> {
    /// Closed loop: the action is a function of the current belief.
    Policy(&'a PolicyPartition),
    /// Open loop; the horizon is capped at the sequence length.
    Sequence(&'a [usize]),
    /// Uniformly random actions, independent of the belief.
    Uniform,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Trajectory {
    /// `b_0..b_T`.
    pub beliefs: Vec<Belief>,
    /// `a_0..a_{T-1}`.
    pub actions: Vec<usize>,
    /// `z_1..z_T`.
    pub observations: Vec<usize>,
    /// Hidden states `q_0..q_T` when recorded.
    pub states: Option<Vec<usize>>,
}

impl Trajectory {
    pub fn len(&self) -> usize {
        self.actions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.actions.is_empty()
    }
}

/// Generator for the `k`-th independent stream under a master seed.
pub fn stream_rng(seed: u64, k: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(k);
    rng
}

fn sample_index(weights: &[f64], rng: &mut impl Rng) -> usize {
    WeightedIndex::new(weights).expect("probability vector has positive mass").sample(rng)
}

fn run(
    pomdp: &Pomdp,
    b0: &Belief,
    regime: ActionRegime<'_>,
    horizon: usize,
    rng: &mut impl Rng,
    record_states: bool,
) -> Result<Trajectory, PomdpError> {
    let n = pomdp.num_states();
    let horizon = match regime {
        ActionRegime::Sequence(s) => horizon.min(s.len()),
        _ => horizon,
    };
    let mut q = sample_index(b0, rng);
    let mut traj = Trajectory {
        beliefs: Vec::with_capacity(horizon + 1),
        actions: Vec::with_capacity(horizon),
        observations: Vec::with_capacity(horizon),
        states: record_states.then(|| vec![q]),
    };
    let mut b = b0.clone();
    for t in 0..horizon {
        let a = match regime {
            ActionRegime::Policy(p) => p.policy_action(&b),
            ActionRegime::Sequence(s) => s[t],
            ActionRegime::Uniform => rng.random_range(0..pomdp.num_actions()),
        };
        let column: Vec<f64> = (0..n).map(|i| pomdp.t(a, i, q)).collect();
        q = sample_index(&column, rng);
        let z = sample_index(&pomdp.observation_table(a)[q], rng);
        let next = belief_update(pomdp, &b, a, z)?;
        traj.beliefs.push(std::mem::replace(&mut b, next));
        traj.actions.push(a);
        traj.observations.push(z);
        if let Some(s) = traj.states.as_mut() {
            s.push(q);
        }
    }
    traj.beliefs.push(b);
    Ok(traj)
}

/// One trajectory from the model's initial belief; deterministic in `seed`.
pub fn simulate(pomdp: &Pomdp, regime: ActionRegime<'_>, horizon: usize, seed: u64) -> Result<Trajectory, PomdpError> {
    run(pomdp, pomdp.initial_belief(), regime, horizon, &mut stream_rng(seed, 0), false)
}

/// Like [`simulate`] from an explicit `b0`, also recording hidden states.
pub fn simulate_states(
    pomdp: &Pomdp,
    b0: &Belief,
    regime: ActionRegime<'_>,
    horizon: usize,
    rng: &mut impl Rng,
) -> Result<Trajectory, PomdpError> {
    run(pomdp, b0, regime, horizon, rng, true)
}

/// Runs `n_trajectories` (trajectory `k` uses stream `k` of `seed`), in parallel.
pub fn sample_trajectories(
    pomdp: &Pomdp,
    b0: &Belief,
    regime: ActionRegime<'_>,
    horizon: usize,
    n_trajectories: usize,
    seed: u64,
) -> Result<Vec<Trajectory>, PomdpError> {
    (0..n_trajectories as u64).into_par_iter().map(|k| run(pomdp, b0, regime, horizon, &mut stream_rng(seed, k), true)).collect()
}

/// Distinct beliefs visited by `n_trajectories` simulated runs, in first-visit order.
pub fn reach_sample(
    pomdp: &Pomdp,
    b0: &Belief,
    regime: ActionRegime<'_>,
    horizon: usize,
    n_trajectories: usize,
    seed: u64,
) -> Result<Vec<Belief>, PomdpError> {
    let trajs = sample_trajectories(pomdp, b0, regime, horizon, n_trajectories.max(1), seed)?;
    let mut seen = HashSet::new();
    let mut out = Vec::new();
    for b in trajs.into_iter().flat_map(|t| t.beliefs) {
        let key: Vec<u64> = b.iter().map(|v| v.to_bits()).collect();
        if seen.insert(key) {
            out.push(b);
        }
    }
    Ok(out)
}

/// `count` points from the symmetric Dirichlet(`alpha`) distribution on the
/// `n`-state simplex. `alpha = 1` is uniform.
pub fn dirichlet_sample(n: usize, alpha: f64, count: usize, seed: u64) -> Vec<Belief> {
    let gamma = Gamma::new(alpha, 1.0).expect("alpha must be positive");
    let mut rng = stream_rng(seed, 0);
    (0..count)
        .map(|_| loop {
            let w: Vec<f64> = (0..n).map(|_| gamma.sample(&mut rng)).collect();
            if let Ok(b) = Belief::normalized(w) {
                break b;
            }
        })
        .collect()
}
