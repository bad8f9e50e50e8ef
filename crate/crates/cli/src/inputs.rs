use std::fs;
use std::path::Path;

use case_studies::{build_ad_pomdp, build_lattice_pomdp, AdInitial, AdSchedulingSpec, LatticeTeachingSpec};
use certifier::InitialSet;
use poly_algebra::{parse_polynomial, variables, Polynomial};
use pomdp_core::{ad_threshold_policy, full_belief_vars, parse_policy, parse_pomdp, parse_rewards, Belief, PolicyPartition, Pomdp};

use crate::cli::{BarrierArgs, ModelArgs};
use crate::CliError;

pub fn read(path: &Path) -> Result<String, CliError> {
    fs::read_to_string(path).map_err(|e| CliError::Input(format!("cannot read {}: {e}", path.display())))
}

pub fn write(path: &Path, contents: &[u8]) -> Result<(), CliError> {
    fs::write(path, contents).map_err(|e| CliError::Input(format!("cannot write {}: {e}", path.display())))
}

fn cell(s: &str) -> Result<(usize, usize), CliError> {
    let parts: Vec<&str> = s.split(',').map(str::trim).collect();
    match parts.as_slice() {
        [r, c] => match (r.parse(), c.parse()) {
            (Ok(r), Ok(c)) => Ok((r, c)),
            _ => Err(CliError::Input(format!("cell `{s}` must be `row,column`"))),
        },
        _ => Err(CliError::Input(format!("cell `{s}` must be `row,column`"))),
    }
}

/// Built-in model by name, if `name` is one.
pub fn builtin(name: &str, lattice: Option<(usize, usize, &str, &str)>) -> Result<Option<Pomdp>, CliError> {
    let model = match name {
        "ad" => build_ad_pomdp(&AdSchedulingSpec::default())?,
        "ad-low" => build_ad_pomdp(&AdSchedulingSpec { initial: AdInitial::LowInterest, ..AdSchedulingSpec::default() })?,
        "lattice" => {
            let (width, height, start, target) = lattice.unwrap_or((4, 4, "1,1", "3,3"));
            build_lattice_pomdp(&LatticeTeachingSpec { width, height, initial: cell(start)?, target: cell(target)? })?
        }
        _ => return Ok(None),
    };
    Ok(Some(model))
}

pub fn load_model(name: &str) -> Result<Pomdp, CliError> {
    match builtin(name, None)? {
        Some(p) => Ok(p),
        None => parse_pomdp(&read(Path::new(name))?).map_err(|e| CliError::Input(format!("{name}: {e}"))),
    }
}

fn probabilities(s: &str) -> Result<Vec<f64>, CliError> {
    s.split(',').map(|v| v.trim().parse::<f64>().map_err(|_| CliError::Input(format!("`{v}` is not a number")))).collect()
}

/// The model with the optional initial-belief override applied.
pub fn model(args: &ModelArgs) -> Result<Pomdp, CliError> {
    let p = load_model(&args.model)?;
    match &args.initial {
        Some(s) => Ok(p.with_initial_belief(Belief::new(probabilities(s)?)?)?),
        None => Ok(p),
    }
}

pub fn policy(pomdp: &Pomdp, source: Option<&str>) -> Result<Option<PolicyPartition>, CliError> {
    match source {
        None => Ok(None),
        Some("paper") => Ok(Some(ad_threshold_policy(pomdp)?)),
        Some(path) => Ok(Some(parse_policy(pomdp, &read(Path::new(path))?)?)),
    }
}

pub fn initial_set(pomdp: &Pomdp, args: &BarrierArgs) -> Result<InitialSet, CliError> {
    if args.initial_constraints.is_empty() {
        return Ok(InitialSet::Point(pomdp.initial_belief().clone()));
    }
    let vars = full_belief_vars(pomdp.num_states());
    let gs = args
        .initial_constraints
        .iter()
        .map(|g| parse_polynomial(g, &vars).map_err(|e| CliError::Input(format!("initial constraint `{g}`: {e}"))))
        .collect::<Result<Vec<Polynomial>, _>>()?;
    if gs.iter().any(|g| g.degree() > 1) {
        return Err(CliError::Input("initial constraints must be affine".into()));
    }
    Ok(InitialSet::Polytope(gs))
}

pub fn states(pomdp: &Pomdp, names: &[String]) -> Result<Vec<usize>, CliError> {
    if names.is_empty() {
        return Ok(vec![pomdp.num_states() - 1]);
    }
    names
        .iter()
        .map(|s| match pomdp.state_index(s) {
            Ok(i) => Ok(i),
            Err(_) => match s.parse::<usize>() {
                Ok(i) if i < pomdp.num_states() => Ok(i),
                _ => Err(CliError::Input(format!("unknown state `{s}`"))),
            },
        })
        .collect()
}

/// `R[q][a]` from a file, a constant, or the model itself.
pub fn rewards(pomdp: &Pomdp, file: Option<&Path>, constant: Option<f64>) -> Result<Vec<Vec<f64>>, CliError> {
    if let Some(c) = constant {
        return Ok(vec![vec![c; pomdp.num_actions()]; pomdp.num_states()]);
    }
    if let Some(path) = file {
        return parse_rewards(pomdp, &read(path)?).map_err(|e| CliError::Input(format!("{}: {e}", path.display())));
    }
    pomdp.rewards().map(<[Vec<f64>]>::to_vec).ok_or_else(|| CliError::Input("no rewards: pass --rewards or --reward-const".into()))
}

pub fn tube(text: Option<&str>) -> Result<Option<Polynomial>, CliError> {
    text.map(|s| parse_polynomial(s, &variables(&["t"])).map_err(|e| CliError::Input(format!("tube `{s}`: {e}")))).transpose()
}

/// Unsafe state indices and a threshold checked to lie in `[0, 1]`.
pub fn safety(pomdp: &Pomdp, names: &[String], lambda: f64) -> Result<(Vec<usize>, f64), CliError> {
    if !(0.0..=1.0).contains(&lambda) {
        return Err(CliError::Input(format!("lambda {lambda} must lie in [0, 1]")));
    }
    Ok((states(pomdp, names)?, lambda))
}
