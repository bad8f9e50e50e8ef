use std::io::{self, Write};

use crate::{Belief, Pomdp, Trajectory};

fn header(w: &mut impl Write, n: usize) -> io::Result<()> {
    let cols: Vec<String> = (1..=n).map(|i| format!("b{i}")).collect();
    writeln!(w, "t,{},action,observation", cols.join(","))
}

fn row(w: &mut impl Write, t: &str, b: &Belief, action: &str, obs: &str) -> io::Result<()> {
    let vals: Vec<String> = b.iter().map(f64::to_string).collect();
    writeln!(w, "{t},{},{action},{obs}", vals.join(","))
}

/// One row per time step: `b_t`, the action taken at `t` and the observation
/// that produced `b_t`. Trajectories are concatenated, each restarting at `t = 0`.
pub fn write_trajectory_csv(w: &mut impl Write, pomdp: &Pomdp, trajs: &[Trajectory]) -> io::Result<()> {
    header(w, pomdp.num_states())?;
    for tr in trajs {
        for (t, b) in tr.beliefs.iter().enumerate() {
            let a = tr.actions.get(t).map_or("", |&a| pomdp.actions[a].as_str());
            let z = t.checked_sub(1).map_or("", |k| pomdp.observations[tr.observations[k]].as_str());
            row(w, &t.to_string(), b, a, z)?;
        }
    }
    Ok(())
}

/// Belief points without time, action or observation.
pub fn write_cloud_csv(w: &mut impl Write, n: usize, beliefs: &[Belief]) -> io::Result<()> {
    header(w, n)?;
    for b in beliefs {
        row(w, "", b, "", "")?;
    }
    Ok(())
}
