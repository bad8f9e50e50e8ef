use pomdp_core::{stream_rng, Belief, Pomdp};
use rand::Rng;

use crate::CaseStudyError;

/// A model whose last state is unsafe and cannot be entered from safe
/// states. Its self-loop is small enough that no observation raises the
/// unsafe mass, so `b(q_n)` never increases along any branch.
#[derive(Clone, Debug)]
pub struct AbsorbingSafeModel {
    pub pomdp: Pomdp,
    pub unsafe_state: usize,
    /// Threshold on the unsafe mass, above the initial one.
    pub lambda: f64,
    pub horizon: u32,
}

fn distribution(rng: &mut impl Rng, len: usize, floor: f64) -> Vec<f64> {
    let w: Vec<f64> = (0..len).map(|_| rng.random_range(floor..1.0)).collect();
    let s: f64 = w.iter().sum();
    w.into_iter().map(|x| x / s).collect()
}

/// Random instance with 2 to 4 states, 1 or 2 actions and 1 to 3
/// observations, reproducible from `seed`.
pub fn random_absorbing_safe(seed: u64) -> Result<AbsorbingSafeModel, CaseStudyError> {
    let mut rng = stream_rng(seed, 0);
    let n = rng.random_range(2..=4usize);
    let na = rng.random_range(1..=2usize);
    let nz = rng.random_range(1..=3usize);
    let last = n - 1;
    let observation: Vec<Vec<Vec<f64>>> = (0..na).map(|_| (0..n).map(|_| distribution(&mut rng, nz, 0.2)).collect()).collect();
    // rho * O(q_n, a, z) <= min_q O(q, a, z) keeps the unsafe posterior from growing.
    let mut rho_max: f64 = 1.0;
    for o in &observation {
        for z in 0..nz {
            let min = (0..n).map(|q| o[q][z]).fold(f64::INFINITY, f64::min);
            rho_max = rho_max.min(min / o[last][z]);
        }
    }
    let transition: Vec<Vec<Vec<f64>>> = (0..na)
        .map(|_| {
            let rho = rng.random_range(0.0..0.9) * rho_max;
            let mut t = vec![vec![0.0; n]; n];
            for j in 0..n {
                let safe = distribution(&mut rng, last, 0.05);
                let keep = if j == last { rho } else { 0.0 };
                for (i, p) in safe.iter().enumerate() {
                    t[i][j] = p * (1.0 - keep);
                }
                t[last][j] = keep;
            }
            t
        })
        .collect();
    let lambda = rng.random_range(0.2..0.8);
    let mu = rng.random_range(0.0..0.5) * lambda;
    let mut b0 = distribution(&mut rng, last, 0.05).into_iter().map(|p| p * (1.0 - mu)).collect::<Vec<_>>();
    b0.push(mu);
    let horizon = rng.random_range(2..=5u32);
    let pomdp = Pomdp::with_default_names(transition, observation, Belief::new(b0)?)?;
    Ok(AbsorbingSafeModel { pomdp, unsafe_state: last, lambda, horizon })
}
