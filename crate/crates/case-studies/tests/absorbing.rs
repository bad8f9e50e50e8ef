use case_studies::random_absorbing_safe;
use pomdp_core::{belief_update, dirichlet_sample, likelihood};
use proptest::prelude::*;

proptest! {
    #[test]
    fn structure_matches_its_description(seed in any::<u64>()) {
        let m = random_absorbing_safe(seed).unwrap();
        let p = &m.pomdp;
        let n = p.num_states();
        prop_assert!((2..=4).contains(&n));
        prop_assert!((1..=2).contains(&p.num_actions()));
        prop_assert!((1..=3).contains(&p.num_observations()));
        prop_assert_eq!(m.unsafe_state, n - 1);
        prop_assert!((2..=5).contains(&m.horizon));
        prop_assert!(m.lambda > 0.0 && m.lambda < 1.0);
        prop_assert!(p.initial_belief()[n - 1] < m.lambda);
        for a in 0..p.num_actions() {
            for j in 0..n - 1 {
                prop_assert_eq!(p.t(a, n - 1, j), 0.0, "safe state {} leaks", j);
            }
        }
    }

    /// Bayes' rule directly: the posterior mass of the last state never
    /// exceeds the prior one.
    #[test]
    fn unsafe_mass_never_increases(seed in any::<u64>()) {
        let m = random_absorbing_safe(seed).unwrap();
        let p = &m.pomdp;
        let n = p.num_states();
        for b in dirichlet_sample(n, 1.0, 50, seed) {
            for a in 0..p.num_actions() {
                for z in 0..p.num_observations() {
                    let pred: Vec<f64> = (0..n).map(|i| (0..n).map(|j| p.t(a, i, j) * b[j]).sum()).collect();
                    let joint: Vec<f64> = (0..n).map(|i| p.o(i, a, z) * pred[i]).collect();
                    let norm: f64 = joint.iter().sum();
                    prop_assert!((norm - likelihood(p, &b, a, z)).abs() < 1e-12);
                    let post = belief_update(p, &b, a, z).unwrap();
                    prop_assert!((post[n - 1] - joint[n - 1] / norm).abs() < 1e-12);
                    prop_assert!(post[n - 1] <= b[n - 1] + 1e-12, "{} -> {}", b[n - 1], post[n - 1]);
                }
            }
        }
    }
}

#[test]
fn same_seed_same_model() {
    let a = random_absorbing_safe(42).unwrap();
    let b = random_absorbing_safe(42).unwrap();
    assert_eq!(pomdp_core::write_pomdp(&a.pomdp), pomdp_core::write_pomdp(&b.pomdp));
    assert_eq!(a.lambda, b.lambda);
}
