mod common;

use certifier::{reach_per_action, reach_policy, reach_single, CertError, CertifierOptions, ReachCondition};
use common::*;
use poly_algebra::parse_polynomial;
use pomdp_core::{full_belief_vars, reach_sample, ActionRegime, Belief, PolicyPartition, Pomdp};
use proptest::prelude::*;

fn opts() -> CertifierOptions {
    CertifierOptions::default()
}

#[test]
fn strict_decrease_fails_on_a_fixed_point() {
    let p = one_state();
    let b0 = p.initial_belief().clone();
    for d in 1..=3 {
        let r = reach_single(&p, &b0, d, ReachCondition::StrictDecrease, &opts());
        assert!(matches!(r, Err(CertError::NotFound { degree }) if degree == d), "degree {d}: {r:?}");
    }
    // The invariance condition has no such obstruction.
    let c = reach_single(&p, &b0, 1, ReachCondition::Invariance, &opts()).unwrap();
    assert!(c.contains(&[1.0], 0.0));
}

#[test]
fn strict_decrease_fails_on_the_contracting_model() {
    let p = contracting([0.5, 0.5]);
    let b0 = p.initial_belief().clone();
    assert!(matches!(reach_single(&p, &b0, 2, ReachCondition::StrictDecrease, &opts()), Err(CertError::NotFound { .. })));
}

#[test]
fn contracting_model_cloud_is_contained() {
    let p = contracting([0.5, 0.5]);
    let b0 = p.initial_belief().clone();
    // Closed form: b2 after t steps is 0.5^(t+1).
    let cloud = reach_sample(&p, &b0, ActionRegime::Uniform, 30, 10, 7).unwrap();
    for (t, b) in cloud.iter().enumerate() {
        assert!((b[1] - 0.5f64.powi(t as i32 + 1)).abs() < 1e-15, "step {t}: {:?}", b);
    }
    for d in 1..=3 {
        let c = reach_single(&p, &b0, d, ReachCondition::Invariance, &opts()).unwrap();
        for b in &cloud {
            assert!(c.contains(b, 1e-8), "degree {d} misses {:?}", b);
        }
    }
}

#[test]
fn contracting_model_excludes_unreachable_beliefs_at_degree_two() {
    // Reachable b2 values lie in (0, 0.5]; the best degree-2 invariant set
    // should cut off beliefs close to the vertex (0, 1).
    let p = contracting([0.5, 0.5]);
    let c = reach_single(&p, p.initial_belief(), 2, ReachCondition::Invariance, &opts()).unwrap();
    assert!(c.contains(&[0.5, 0.5], 1e-8));
    assert!(!c.contains(&[0.0, 1.0], 0.0), "vertex value {}", c.value(&[0.0, 1.0]));
}

#[test]
fn single_action_per_action_matches_single() {
    let p = contracting([0.5, 0.5]);
    let b0 = p.initial_belief().clone();
    let a = reach_single(&p, &b0, 2, ReachCondition::Invariance, &opts()).unwrap();
    let b = reach_per_action(&p, &b0, 2, ReachCondition::Invariance, &opts()).unwrap();
    assert_eq!(a.functions.len(), 1);
    assert_eq!(b.functions.len(), 1);
    assert_eq!(a.functions[0].0, b.functions[0].0);
}

#[test]
fn single_region_policy_matches_the_single_action_model() {
    let p = ad();
    let b0 = Belief::uniform(3);
    let pol = PolicyPartition::constant(&p, 1).unwrap();
    let by_policy = reach_policy(&p, &b0, &pol, 1, &opts()).unwrap();
    // Same dynamics with only action 1 kept.
    let only = Pomdp::with_default_names(vec![p.transition(1).to_vec()], vec![p.observation_table(1).to_vec()], b0.clone()).unwrap();
    let single = reach_single(&only, &b0, 1, ReachCondition::Invariance, &opts()).unwrap();
    for b in pomdp_core::dirichlet_sample(3, 1.0, 200, 3) {
        assert!((by_policy.value(&b) - single.value(&b)).abs() < 1e-6, "{:?}", b);
    }
}

#[test]
fn ad_model_corner_included_at_degree_one_and_excluded_at_degree_three() {
    let p = ad();
    let b0 = Belief::uniform(3);
    let corner = [0.0, 0.0, 1.0];
    let low = reach_per_action(&p, &b0, 1, ReachCondition::Invariance, &opts()).unwrap();
    assert!(low.contains(&corner, 0.0));
    let high = reach_per_action(&p, &b0, 3, ReachCondition::Invariance, &opts()).unwrap();
    assert!(high.membership_margin(&corner) <= -1e-4, "corner margin {}", high.membership_margin(&corner));
    let pol = case_studies::ad_policy(&case_studies::AdSchedulingSpec::default(), &p).unwrap();
    let cloud = reach_sample(&p, &b0, ActionRegime::Policy(&pol), 100, 1000, 11).unwrap();
    for c in [&low, &high] {
        let worst = cloud.iter().map(|b| c.membership_margin(b)).fold(f64::INFINITY, f64::min);
        assert!(worst >= -1e-8, "worst margin {worst}");
    }
}

#[test]
fn ad_policy_partition_contains_policy_cloud() {
    let p = ad();
    let b0 = Belief::uniform(3);
    let pol = case_studies::ad_policy(&case_studies::AdSchedulingSpec::default(), &p).unwrap();
    let c = reach_policy(&p, &b0, &pol, 2, &opts()).unwrap();
    assert_eq!(c.functions.len(), 2);
    let cloud = reach_sample(&p, &b0, ActionRegime::Policy(&pol), 100, 1000, 5).unwrap();
    for b in &cloud {
        assert!(c.contains(b, 1e-8), "{:?} margin {}", b, c.membership_margin(b));
    }
}

#[test]
fn disjoint_halves_pieces_stay_in_their_regions() {
    let p = ad();
    let b0 = Belief::uniform(3);
    let vars = full_belief_vars(3);
    let pol = PolicyPartition::new(&p, vec![(parse_polynomial("b1 - b2", &vars).unwrap(), 0)], 1).unwrap();
    let c = reach_policy(&p, &b0, &pol, 2, &opts()).unwrap();
    let g = &pol.regions()[0].0;
    for b in pomdp_core::dirichlet_sample(3, 1.0, 1000, 9) {
        if !c.contains(&b, 0.0) {
            continue;
        }
        // The piece used at b belongs to the region b lies in.
        let gb = g.eval(&b).unwrap();
        match pol.region_index(&b) {
            0 => assert!(gb <= 1e-6),
            _ => assert!(gb >= -1e-6),
        }
    }
    let cloud = reach_sample(&p, &b0, ActionRegime::Policy(&pol), 100, 500, 2).unwrap();
    assert!(cloud.iter().all(|b| c.contains(b, 1e-8)));
}

#[test]
fn degree_escalation_is_monotone_on_the_ad_model() {
    let p = ad();
    let b0 = Belief::uniform(3);
    for d in 1..=3 {
        reach_single(&p, &b0, d, ReachCondition::Invariance, &opts()).unwrap_or_else(|e| panic!("degree {d}: {e}"));
    }
}

#[test]
fn invalid_inputs_are_rejected() {
    let p = ad();
    let b0 = Belief::uniform(2);
    assert!(matches!(reach_single(&p, &b0, 1, ReachCondition::Invariance, &opts()), Err(CertError::InvalidInput(_))));
    let b0 = Belief::uniform(3);
    assert!(matches!(reach_single(&p, &b0, 0, ReachCondition::Invariance, &opts()), Err(CertError::InvalidInput(_))));
}

fn random_model(seed: u64) -> Pomdp {
    use rand::Rng;
    let mut rng = pomdp_core::stream_rng(seed, 0);
    let n = rng.random_range(2..=3usize);
    let na = rng.random_range(1..=2usize);
    let nz = rng.random_range(1..=2usize);
    let mut dist = |len: usize| {
        let w: Vec<f64> = (0..len).map(|_| rng.random_range(0.1..1.0)).collect();
        let s: f64 = w.iter().sum();
        w.into_iter().map(|x| x / s).collect::<Vec<f64>>()
    };
    let t: Vec<Vec<Vec<f64>>> = (0..na)
        .map(|_| {
            let cols: Vec<Vec<f64>> = (0..n).map(|_| dist(n)).collect();
            (0..n).map(|i| (0..n).map(|j| cols[j][i]).collect()).collect()
        })
        .collect();
    let o: Vec<Vec<Vec<f64>>> = (0..na).map(|_| (0..n).map(|_| dist(nz)).collect()).collect();
    let b0 = dist(n);
    Pomdp::with_default_names(t, o, Belief::new(b0).unwrap()).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(8))]

    #[test]
    fn certified_sets_contain_sampled_beliefs(seed in any::<u64>(), d in 1u32..=2) {
        let p = random_model(seed);
        let b0 = p.initial_belief().clone();
        match reach_per_action(&p, &b0, d, ReachCondition::Invariance, &opts()) {
            Ok(c) => {
                for b in reach_sample(&p, &b0, ActionRegime::Uniform, 40, 300, seed).unwrap() {
                    prop_assert!(c.contains(&b, 1e-8), "margin {}", c.membership_margin(&b));
                }
            }
            Err(CertError::NotFound { .. }) => {}
            Err(e) => prop_assert!(false, "{e}"),
        }
    }
}
