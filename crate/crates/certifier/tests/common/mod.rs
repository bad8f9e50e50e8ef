#![allow(dead_code)]

use pomdp_core::{Belief, Pomdp};

/// One state, one action, one observation: the belief map is the identity.
pub fn one_state() -> Pomdp {
    Pomdp::with_default_names(vec![vec![vec![1.0]]], vec![vec![vec![1.0]]], Belief::new(vec![1.0]).unwrap()).unwrap()
}

/// Two states, uninformative observation, `q2 -> q1` with probability 1/2:
/// `b2` halves every step.
pub fn contracting(b0: [f64; 2]) -> Pomdp {
    let t = vec![vec![1.0, 0.5], vec![0.0, 0.5]];
    let o = vec![vec![1.0], vec![1.0]];
    Pomdp::with_default_names(vec![t], vec![o], Belief::new(b0.to_vec()).unwrap()).unwrap()
}

/// Two states, two actions, one observation. `q2` is unsafe; action 0 sends
/// everything to `q1`, action 1 leaves beliefs unchanged.
pub fn absorbing_two_state(b0: [f64; 2]) -> Pomdp {
    let send = vec![vec![1.0, 1.0], vec![0.0, 0.0]];
    let stay = vec![vec![1.0, 0.0], vec![0.0, 1.0]];
    let o = vec![vec![1.0], vec![1.0]];
    Pomdp::with_default_names(vec![send, stay], vec![o.clone(), o], Belief::new(b0.to_vec()).unwrap()).unwrap()
}

/// Two states where `q1` leaks into the unsafe `q2` with probability 0.3.
pub fn leaking(b0: [f64; 2]) -> Pomdp {
    let t = vec![vec![0.7, 0.0], vec![0.3, 1.0]];
    let o = vec![vec![0.6, 0.4], vec![0.3, 0.7]];
    Pomdp::with_default_names(vec![t], vec![o], Belief::new(b0.to_vec()).unwrap()).unwrap()
}

pub fn ad() -> Pomdp {
    case_studies::build_ad_pomdp(&case_studies::AdSchedulingSpec::default()).unwrap()
}
