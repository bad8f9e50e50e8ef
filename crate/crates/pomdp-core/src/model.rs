use thiserror::Error;

use crate::Belief;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PomdpError {
    #[error("model needs at least one state, action and observation")]
    Empty,
    #[error("transition matrix of action {action} has wrong shape")]
    TransitionShape { action: usize },
    #[error("column {column} of transition matrix {action} sums to {sum}")]
    TransitionNotStochastic { action: usize, column: usize, sum: f64 },
    #[error("observation distribution of state {state} under action {action} sums to {sum}")]
    ObservationNotStochastic { action: usize, state: usize, sum: f64 },
    #[error("observation table of action {action} has wrong shape")]
    ObservationShape { action: usize },
    #[error("probability {value} outside [0, 1]")]
    OutOfRange { value: f64 },
    #[error("belief is not on the simplex: {0}")]
    InvalidBelief(String),
    #[error("reward table has wrong shape")]
    RewardShape,
    #[error("observation {observation} has likelihood {likelihood} under action {action}")]
    ZeroLikelihood { action: usize, observation: usize, likelihood: f64 },
    #[error("invalid policy: {0}")]
    InvalidPolicy(String),
    #[error("unknown {kind} `{name}`")]
    UnknownName { kind: &'static str, name: String },
}

const STOCHASTIC_TOL: f64 = 1e-9;

/// A finite POMDP. `transition[a][i][j] = P(next = i | current = j, a)` and
/// `observation[a][q][z] = P(z | next state q, a)`.
#[derive(Clone, Debug, PartialEq)]
pub struct Pomdp {
    pub states: Vec<String>,
    pub actions: Vec<String>,
    pub observations: Vec<String>,
    transition: Vec<Vec<Vec<f64>>>,
    observation: Vec<Vec<Vec<f64>>>,
    initial: Belief,
    rewards: Option<Vec<Vec<f64>>>,
}

fn check_prob(v: f64) -> Result<(), PomdpError> {
    if (-STOCHASTIC_TOL..=1.0 + STOCHASTIC_TOL).contains(&v) {
        Ok(())
    } else {
        Err(PomdpError::OutOfRange { value: v })
    }
}

impl Pomdp {
    pub fn new(
        states: Vec<String>,
        actions: Vec<String>,
        observations: Vec<String>,
        transition: Vec<Vec<Vec<f64>>>,
        observation: Vec<Vec<Vec<f64>>>,
        initial: Belief,
    ) -> Result<Self, PomdpError> {
        let (n, na, nz) = (states.len(), actions.len(), observations.len());
        if n == 0 || na == 0 || nz == 0 {
            return Err(PomdpError::Empty);
        }
        if transition.len() != na {
            return Err(PomdpError::TransitionShape { action: transition.len().min(na) });
        }
        for (a, t) in transition.iter().enumerate() {
            if t.len() != n || t.iter().any(|r| r.len() != n) {
                return Err(PomdpError::TransitionShape { action: a });
            }
            for j in 0..n {
                let mut sum = 0.0;
                for row in t {
                    check_prob(row[j])?;
                    sum += row[j];
                }
                if (sum - 1.0).abs() > STOCHASTIC_TOL {
                    return Err(PomdpError::TransitionNotStochastic { action: a, column: j, sum });
                }
            }
        }
        if observation.len() != na {
            return Err(PomdpError::ObservationShape { action: observation.len().min(na) });
        }
        for (a, o) in observation.iter().enumerate() {
            if o.len() != n || o.iter().any(|r| r.len() != nz) {
                return Err(PomdpError::ObservationShape { action: a });
            }
            for (q, row) in o.iter().enumerate() {
                for &p in row {
                    check_prob(p)?;
                }
                let sum: f64 = row.iter().sum();
                if (sum - 1.0).abs() > STOCHASTIC_TOL {
                    return Err(PomdpError::ObservationNotStochastic { action: a, state: q, sum });
                }
            }
        }
        if initial.len() != n {
            return Err(PomdpError::InvalidBelief(format!("initial belief has {} entries", initial.len())));
        }
        Ok(Pomdp { states, actions, observations, transition, observation, initial, rewards: None })
    }

    /// Model with generated names `q1..`, `a0..`, `z1..`.
    pub fn with_default_names(
        transition: Vec<Vec<Vec<f64>>>,
        observation: Vec<Vec<Vec<f64>>>,
        initial: Belief,
    ) -> Result<Self, PomdpError> {
        let n = initial.len();
        let na = transition.len();
        let nz = observation.first().and_then(|o| o.first()).map_or(0, Vec::len);
        Pomdp::new(
            (1..=n).map(|i| format!("q{i}")).collect(),
            (0..na).map(|a| format!("a{a}")).collect(),
            (1..=nz).map(|z| format!("z{z}")).collect(),
            transition,
            observation,
            initial,
        )
    }

    pub fn num_states(&self) -> usize {
        self.states.len()
    }

    pub fn num_actions(&self) -> usize {
        self.actions.len()
    }

    pub fn num_observations(&self) -> usize {
        self.observations.len()
    }

    pub fn transition(&self, a: usize) -> &[Vec<f64>] {
        &self.transition[a]
    }

    /// `P(next = i | current = j, a)`.
    pub fn t(&self, a: usize, i: usize, j: usize) -> f64 {
        self.transition[a][i][j]
    }

    /// `P(z | next = q, a)`.
    pub fn o(&self, q: usize, a: usize, z: usize) -> f64 {
        self.observation[a][q][z]
    }

    pub fn observation_table(&self, a: usize) -> &[Vec<f64>] {
        &self.observation[a]
    }

    pub fn initial_belief(&self) -> &Belief {
        &self.initial
    }

    pub fn with_initial_belief(mut self, b: Belief) -> Result<Self, PomdpError> {
        if b.len() != self.num_states() {
            return Err(PomdpError::InvalidBelief(format!("initial belief has {} entries", b.len())));
        }
        self.initial = b;
        Ok(self)
    }

    /// Rewards `R(q, a)` indexed `[q][a]`.
    pub fn rewards(&self) -> Option<&[Vec<f64>]> {
        self.rewards.as_deref()
    }

    pub fn with_rewards(mut self, r: Vec<Vec<f64>>) -> Result<Self, PomdpError> {
        if r.len() != self.num_states() || r.iter().any(|row| row.len() != self.num_actions()) {
            return Err(PomdpError::RewardShape);
        }
        if r.iter().flatten().any(|v| !v.is_finite()) {
            return Err(PomdpError::RewardShape);
        }
        self.rewards = Some(r);
        Ok(self)
    }

    fn index(names: &[String], kind: &'static str, name: &str) -> Result<usize, PomdpError> {
        names
            .iter()
            .position(|n| n == name)
            .or_else(|| name.parse::<usize>().ok().filter(|&i| i < names.len()))
            .ok_or_else(|| PomdpError::UnknownName { kind, name: name.to_string() })
    }

    /// Resolves a state by name or 0-based index.
    pub fn state_index(&self, name: &str) -> Result<usize, PomdpError> {
        Self::index(&self.states, "state", name)
    }

    pub fn action_index(&self, name: &str) -> Result<usize, PomdpError> {
        Self::index(&self.actions, "action", name)
    }

    pub fn observation_index(&self, name: &str) -> Result<usize, PomdpError> {
        Self::index(&self.observations, "observation", name)
    }
}
