//! Finite POMDPs viewed as switched systems on the belief simplex.

mod belief;
mod cassandra;
mod csv;
mod model;
mod policy;
mod simulate;

pub use belief::{
    belief_update, belief_vars, eliminate_last, likelihood, rational_map, rational_maps, to_eliminated, Belief, BranchMap,
    ZERO_LIKELIHOOD_TOL,
};
pub use cassandra::{parse_pomdp, parse_rewards, write_pomdp, FormatError};
pub use csv::{write_cloud_csv, write_trajectory_csv};
pub use model::{Pomdp, PomdpError};
pub use policy::{ad_threshold_policy, full_belief_vars, parse_policy, PolicyPartition};
pub use simulate::{dirichlet_sample, reach_sample, sample_trajectories, simulate, simulate_states, stream_rng, ActionRegime, Trajectory};
