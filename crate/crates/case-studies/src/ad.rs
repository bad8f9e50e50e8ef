use poly_algebra::parse_polynomial;
use pomdp_core::{full_belief_vars, Belief, PolicyPartition, Pomdp};

use crate::CaseStudyError;

/// Initial belief of the ad model.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum AdInitial {
    /// `(1/3, 1/3, 1/3)`, used for the reachability experiment.
    #[default]
    Uniform,
    /// All mass on low interest.
    LowInterest,
}

/// Three interest levels, actions `a0` (no ads) and `a1` (ads), and three
/// like-count bins observed through Poisson counts.
#[derive(Clone, Debug, PartialEq)]
pub struct AdSchedulingSpec {
    pub rates: [f64; 3],
    /// Counts `<= gamma1` are "low".
    pub gamma1: u32,
    /// Counts in `(gamma1, gamma2]` are "medium"; `None` means no "high" bin mass.
    pub gamma2: Option<u32>,
    /// Column-stochastic, `[i][j] = P(next = i | current = j)`.
    pub no_ads: [[f64; 3]; 3],
    pub ads: [[f64; 3]; 3],
    /// `a0` is played while `b1 + b2 <= policy_threshold`.
    pub policy_threshold: f64,
    pub initial: AdInitial,
}

impl Default for AdSchedulingSpec {
    fn default() -> Self {
        AdSchedulingSpec {
            rates: [2.0, 4.0, 6.0],
            gamma1: 3,
            gamma2: Some(6),
            no_ads: [[0.8, 0.2, 0.1], [0.1, 0.7, 0.2], [0.1, 0.1, 0.7]],
            ads: [[0.5, 0.3, 0.2], [0.3, 0.6, 0.2], [0.2, 0.1, 0.6]],
            policy_threshold: 0.5,
            initial: AdInitial::Uniform,
        }
    }
}

/// `P(X <= k)` for `X ~ Poisson(rate)`.
pub fn poisson_cdf(rate: f64, k: u32) -> f64 {
    let mut term = (-rate).exp();
    let mut sum = term;
    for j in 1..=k {
        term *= rate / f64::from(j);
        sum += term;
    }
    sum.min(1.0)
}

fn observation_row(rate: f64, gamma1: u32, gamma2: Option<u32>) -> Vec<f64> {
    let low = poisson_cdf(rate, gamma1);
    match gamma2 {
        Some(g2) => {
            let upto = poisson_cdf(rate, g2);
            vec![low, upto - low, 1.0 - upto]
        }
        None => vec![low, 1.0 - low, 0.0],
    }
}

pub fn build_ad_pomdp(spec: &AdSchedulingSpec) -> Result<Pomdp, CaseStudyError> {
    if spec.rates.iter().any(|r| !(r.is_finite() && *r > 0.0)) {
        return Err(CaseStudyError::InvalidSpec("Poisson rates must be positive".into()));
    }
    if spec.gamma2.is_some_and(|g2| g2 <= spec.gamma1) {
        return Err(CaseStudyError::InvalidSpec("thresholds must satisfy gamma1 < gamma2".into()));
    }
    let obs: Vec<Vec<f64>> = spec.rates.iter().map(|&r| observation_row(r, spec.gamma1, spec.gamma2)).collect();
    let to_vec = |m: &[[f64; 3]; 3]| m.iter().map(|r| r.to_vec()).collect::<Vec<_>>();
    let initial = match spec.initial {
        AdInitial::Uniform => Belief::uniform(3),
        AdInitial::LowInterest => Belief::vertex(3, 0),
    };
    let p = Pomdp::new(
        vec!["q1".into(), "q2".into(), "q3".into()],
        vec!["a0".into(), "a1".into()],
        vec!["z1".into(), "z2".into(), "z3".into()],
        vec![to_vec(&spec.no_ads), to_vec(&spec.ads)],
        vec![obs.clone(), obs],
        initial,
    )?;
    Ok(p)
}

/// `a0` on `{b1 + b2 - threshold <= 0}`, `a1` elsewhere.
pub fn ad_policy(spec: &AdSchedulingSpec, pomdp: &Pomdp) -> Result<PolicyPartition, CaseStudyError> {
    let vars = full_belief_vars(pomdp.num_states());
    let guard =
        parse_polynomial(&format!("b1 + b2 - {}", spec.policy_threshold), &vars).map_err(|e| CaseStudyError::InvalidSpec(e.to_string()))?;
    Ok(PolicyPartition::new(pomdp, vec![(guard, 0)], 1)?)
}
