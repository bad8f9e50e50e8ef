mod common;

use certifier::{
    validate_certificate, verify_optimality, verify_safety, BarrierCertificate, BarrierMode, CertError, Certificate, CertifierOptions,
    InitialSet, UnsafeSet,
};
use common::*;
use poly_algebra::{parse_polynomial, variables};
use pomdp_core::{belief_update, dirichlet_sample, likelihood, sample_trajectories, ActionRegime, Belief, PolicyPartition, Pomdp};
use rand::Rng;

fn opts() -> CertifierOptions {
    CertifierOptions::default()
}

fn point(b: &[f64]) -> InitialSet {
    InitialSet::Point(Belief::new(b.to_vec()).unwrap())
}

fn validate(c: &BarrierCertificate, p: &Pomdp) {
    let e = validate_certificate(&Certificate::from(c.clone()), p, 1000, 1).unwrap();
    assert!(e.worst_sample_margin >= -1e-8 && e.worst_trajectory_margin >= -1e-8, "{e:?}");
}

/// Worst unsafe mass at the horizon over `runs` uniform-action simulations.
fn worst_final_mass(p: &Pomdp, b0: &Belief, states: &[usize], horizon: u32, runs: usize, seed: u64) -> f64 {
    sample_trajectories(p, b0, ActionRegime::Uniform, horizon as usize, runs, seed)
        .unwrap()
        .iter()
        .map(|t| states.iter().map(|&q| t.beliefs.last().unwrap()[q]).sum::<f64>())
        .fold(f64::NEG_INFINITY, f64::max)
}

#[test]
fn vacuous_threshold_is_certified_at_degree_one() {
    let p = ad();
    let b0 = Belief::uniform(3);
    let c = verify_safety(&p, &InitialSet::Point(b0), &[2], 1.0, 5, 1, BarrierMode::Monolithic, None, &opts()).unwrap();
    assert_eq!(c.vacuous, vec![true]);
    assert!(c.value(0.0, &[1.0 / 3.0; 3]) < 0.0);
    validate(&c, &p);
}

/// All action words of length `tau`: with one observation the belief run is
/// determined by the actions.
fn enumerate_final_mass(p: &Pomdp, b0: &Belief, tau: u32) -> f64 {
    let na = p.num_actions();
    let mut worst = f64::NEG_INFINITY;
    for word in 0..na.pow(tau) {
        let mut b = b0.clone();
        let mut w = word;
        for _ in 0..tau {
            b = belief_update(p, &b, w % na, 0).unwrap();
            w /= na;
        }
        worst = worst.max(b[1]);
    }
    worst
}

#[test]
fn absorbing_two_state_model_is_certified() {
    let p = absorbing_two_state([1.0, 0.0]);
    let b0 = Belief::new(vec![1.0, 0.0]).unwrap();
    assert_eq!(enumerate_final_mass(&p, &b0, 4), 0.0);
    let c = certifier::escalate(2, |d| {
        verify_safety(&p, &InitialSet::Point(b0.clone()), &[1], 0.5, 4, d, BarrierMode::Monolithic, None, &opts())
    })
    .unwrap();
    assert!(c.degree <= 2);
    validate(&c, &p);
}

#[test]
fn zero_threshold_with_leak_is_not_found_and_violated() {
    let p = leaking([1.0, 0.0]);
    let b0 = Belief::new(vec![1.0, 0.0]).unwrap();
    for d in 1..=3 {
        let r = verify_safety(&p, &InitialSet::Point(b0.clone()), &[1], 0.0, 3, d, BarrierMode::Monolithic, None, &opts());
        assert!(matches!(r, Err(CertError::NotFound { .. })), "degree {d}: {r:?}");
    }
    assert!(worst_final_mass(&p, &b0, &[1], 3, 100, 4) > 0.0);
}

#[test]
fn overlapping_initial_sets_are_rejected() {
    let p = absorbing_two_state([0.2, 0.8]);
    let r = verify_safety(&p, &point(&[0.2, 0.8]), &[1], 0.5, 3, 1, BarrierMode::Monolithic, None, &opts());
    assert!(matches!(r, Err(CertError::Overlap { mass, .. }) if (mass - 0.8).abs() < 1e-12));
    // b2 >= 0.6 touches the unsafe set b2 > 0.5.
    let vars = pomdp_core::full_belief_vars(2);
    let box_ = InitialSet::Polytope(vec![parse_polynomial("b2 - 0.6", &vars).unwrap()]);
    let r = verify_safety(&p, &box_, &[1], 0.5, 3, 1, BarrierMode::Monolithic, None, &opts());
    assert!(matches!(r, Err(CertError::Overlap { mass, .. }) if (mass - 1.0).abs() < 1e-9), "{r:?}");
}

#[test]
fn polytope_initial_set_is_certified() {
    let p = absorbing_two_state([0.9, 0.1]);
    let vars = pomdp_core::full_belief_vars(2);
    let init = InitialSet::Polytope(vec![parse_polynomial("0.2 - b2", &vars).unwrap()]);
    let c = verify_safety(&p, &init, &[1], 0.5, 3, 1, BarrierMode::Monolithic, None, &opts()).unwrap();
    for b in dirichlet_sample(2, 1.0, 200, 3) {
        if b[1] <= 0.2 {
            assert!(c.value(0.0, &b) < 0.0);
        }
    }
    validate(&c, &p);
}

/// The three monolithic conditions for `B(t, b) = sum_a w_a B_a(t, b)` at
/// sampled beliefs.
fn check_combination(c: &BarrierCertificate, p: &Pomdp, w: &[f64], samples: &[Belief], b0: &Belief) {
    let (states, lambda) = match &c.property {
        UnsafeSet::Safety { states, lambda } => (states.clone(), *lambda),
        _ => unreachable!(),
    };
    let b = |t: f64, x: &[f64]| -> f64 { (0..w.len()).map(|i| w[i] * c.eval_function(i, t, x)).sum() };
    assert!(b(0.0, b0) < 0.0);
    let tau = f64::from(c.horizon);
    for x in samples {
        if states.iter().map(|&q| x[q]).sum::<f64>() > lambda {
            assert!(b(tau, x) > 0.0, "unsafe {:?}", x);
        }
        for a in 0..p.num_actions() {
            for z in 0..p.num_observations() {
                if likelihood(p, x, a, z) <= 1e-9 {
                    continue;
                }
                let y = belief_update(p, x, a, z).unwrap();
                for t in 1..=c.horizon {
                    let t = f64::from(t);
                    assert!(b(t, &y) <= b(t - 1.0, x) + 1e-8, "decrease at {:?} a{a} z{z} t{t}", x);
                }
            }
        }
    }
}

#[test]
fn per_action_convex_hull_is_a_barrier() {
    let p = absorbing_two_state([1.0, 0.0]);
    let b0 = Belief::new(vec![1.0, 0.0]).unwrap();
    let c = verify_safety(&p, &InitialSet::Point(b0.clone()), &[1], 0.5, 4, 1, BarrierMode::PerActionHull, None, &opts()).unwrap();
    assert_eq!(c.functions.len(), 2);
    validate(&c, &p);
    let samples = dirichlet_sample(2, 1.0, 1000, 8);
    let mut rng = pomdp_core::stream_rng(5, 0);
    for _ in 0..100 {
        let u: f64 = rng.random();
        check_combination(&c, &p, &[u, 1.0 - u], &samples, &b0);
    }
}

#[test]
fn barrier_chain_holds_along_trajectories() {
    let m = case_studies::random_absorbing_safe(3).unwrap();
    let p = &m.pomdp;
    let b0 = p.initial_belief().clone();
    let c = certifier::escalate(2, |d| {
        verify_safety(p, &InitialSet::Point(b0.clone()), &[m.unsafe_state], m.lambda, m.horizon, d, BarrierMode::Monolithic, None, &opts())
    })
    .unwrap();
    assert!(c.value(0.0, &b0) < 0.0);
    for t in sample_trajectories(p, &b0, ActionRegime::Uniform, m.horizon as usize, 1000, 2).unwrap() {
        for s in 1..t.beliefs.len() {
            let (prev, cur) = (c.value((s - 1) as f64, &t.beliefs[s - 1]), c.value(s as f64, &t.beliefs[s]));
            assert!(cur <= prev + 1e-8, "step {s}: {prev} -> {cur}");
        }
    }
}

#[test]
fn absorbing_family_certificates_are_empirically_safe() {
    for seed in 0..5 {
        let m = case_studies::random_absorbing_safe(seed).unwrap();
        let p = &m.pomdp;
        let b0 = p.initial_belief().clone();
        let c = certifier::escalate(2, |d| {
            verify_safety(
                p,
                &InitialSet::Point(b0.clone()),
                &[m.unsafe_state],
                m.lambda,
                m.horizon,
                d,
                BarrierMode::Monolithic,
                None,
                &opts(),
            )
        });
        let Ok(c) = c else { continue };
        validate(&c, p);
        assert!(worst_final_mass(p, &b0, &[m.unsafe_state], m.horizon, 2000, seed) <= m.lambda);
    }
}

#[test]
fn partition_mode_is_certified_and_sound() {
    let p = absorbing_two_state([1.0, 0.0]);
    let vars = pomdp_core::full_belief_vars(2);
    let pol = PolicyPartition::new(&p, vec![(parse_polynomial("b2 - 0.25", &vars).unwrap(), 1)], 0).unwrap();
    let c = verify_safety(&p, &point(&[1.0, 0.0]), &[1], 0.5, 3, 1, BarrierMode::PerPartition, Some(&pol), &opts()).unwrap();
    assert_eq!(c.functions.len(), 2);
    validate(&c, &p);
}

#[test]
fn zero_reward_is_certified() {
    let p = absorbing_two_state([1.0, 0.0]);
    let r = vec![vec![0.0; 2]; 2];
    let c = verify_optimality(&p, &point(&[1.0, 0.0]), &r, 0.0, None, 3, 1, BarrierMode::Monolithic, None, &opts()).unwrap();
    assert_eq!(c.vacuous, vec![true, true]);
    validate(&c, &p);
}

#[test]
fn constant_reward_is_certified_with_exact_budget() {
    let p = contracting([0.5, 0.5]);
    let tau = 4;
    let r = vec![vec![1.0]; 2];
    let tube = parse_polynomial("1", &variables(&["t"])).unwrap();
    let c = verify_optimality(&p, &point(&[0.5, 0.5]), &r, f64::from(tau + 1), Some(&tube), tau, 1, BarrierMode::Monolithic, None, &opts())
        .unwrap();
    validate(&c, &p);
}

/// Two contracting actions; `q2` pays 1 under action 0 and 2 under action 1.
fn rewarded_contraction() -> Pomdp {
    let slow = vec![vec![1.0, 0.5], vec![0.0, 0.5]];
    let fast = vec![vec![1.0, 0.8], vec![0.0, 0.2]];
    let o = vec![vec![0.7, 0.3], vec![0.4, 0.6]];
    Pomdp::with_default_names(vec![slow, fast], vec![o.clone(), o], Belief::new(vec![0.5, 0.5]).unwrap()).unwrap()
}

#[test]
fn action_dependent_rewards_with_linear_tube() {
    let p = rewarded_contraction();
    let r = vec![vec![0.0, 0.0], vec![1.0, 2.0]];
    let tau = 3;
    let tube = parse_polynomial("1.5 - 0.1*t", &variables(&["t"])).unwrap();
    let gamma: f64 = (0..=tau).map(|s| 1.5 - 0.1 * f64::from(s)).sum();
    let c = certifier::escalate(2, |d| {
        verify_optimality(&p, &point(&[0.5, 0.5]), &r, gamma, Some(&tube), tau, d, BarrierMode::Monolithic, None, &opts())
    })
    .unwrap();
    validate(&c, &p);
    let b0 = Belief::new(vec![0.5, 0.5]).unwrap();
    for t in sample_trajectories(&p, &b0, ActionRegime::Uniform, tau as usize, 10_000, 6).unwrap() {
        let total: f64 = (0..=tau as usize)
            .map(|s| {
                let b = &t.beliefs[s];
                // The last belief has no recorded action; take the worst one.
                let acts: Vec<usize> = if s < t.actions.len() { vec![t.actions[s]] } else { (0..2).collect() };
                acts.iter().map(|&a| b[0] * r[0][a] + b[1] * r[1][a]).fold(f64::NEG_INFINITY, f64::max)
            })
            .sum();
        assert!(total <= gamma, "{total}");
    }
}

#[test]
fn oversized_tube_is_rejected() {
    let p = contracting([0.5, 0.5]);
    let tube = parse_polynomial("2", &variables(&["t"])).unwrap();
    let r =
        verify_optimality(&p, &point(&[0.5, 0.5]), &[vec![1.0], vec![1.0]], 5.0, Some(&tube), 3, 1, BarrierMode::Monolithic, None, &opts());
    assert!(matches!(r, Err(CertError::TubeViolation { sum, .. }) if sum == 8.0));
}
