use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use certifier::{
    barrier_program, escalate, reach_per_action, reach_policy, reach_program, reach_single, validate_certificate, verify_optimality,
    verify_safety, write_certificate, BarrierCertificate, BarrierMode, CertError, Certificate, CertifierOptions, Evidence, ReachCondition,
    UnsafeSet,
};
use lp_core::write_mps;
use poly_algebra::{variables, Polynomial};
use pomdp_core::{reach_sample, sample_trajectories, write_cloud_csv, write_pomdp, write_trajectory_csv, ActionRegime, Pomdp};

use crate::cli::*;
use crate::grid::{grid_size, write_set_csv};
use crate::inputs;
use crate::CliError;

/// Largest grid written to a set CSV.
const MAX_GRID_POINTS: u128 = 2_000_000;

fn create(path: &Path) -> Result<BufWriter<File>, CliError> {
    File::create(path).map(BufWriter::new).map_err(|e| CliError::Input(format!("cannot write {}: {e}", path.display())))
}

/// Exactly `--degree` when given, otherwise degrees up to `--max-degree`.
fn attempt<T>(degree: &DegreeArgs, mut f: impl FnMut(u32) -> Result<T, CertError>) -> Result<T, CertError> {
    match degree.degree {
        Some(d) => f(d),
        None => escalate(degree.max_degree, f),
    }
}

fn seed_line(seed: u64) {
    println!("seed: {seed}");
}

/// Validates `cert`, writes it with its evidence and prints the summary.
fn finish(cert: Certificate, pomdp: &Pomdp, out: &CertOut, seed: u64) -> Result<Evidence, CliError> {
    let ev = validate_certificate(&cert, pomdp, out.samples, seed)?;
    inputs::write(&out.cert, write_certificate(&cert, Some(&ev)).as_bytes())?;
    for line in ev.summary_lines() {
        println!("{line}");
    }
    println!("certificate: {}", out.cert.display());
    Ok(ev)
}

pub fn simulate(args: &SimulateArgs) -> Result<(), CliError> {
    let p = inputs::model(&args.model)?;
    let policy = inputs::policy(&p, args.policy.as_deref())?;
    let actions = match &args.actions {
        Some(s) => Some(s.split(',').map(|a| p.action_index(a.trim())).collect::<Result<Vec<_>, _>>()?),
        None => None,
    };
    let regime = match (&policy, &actions) {
        (Some(pol), _) => ActionRegime::Policy(pol),
        (None, Some(seq)) => ActionRegime::Sequence(seq),
        (None, None) => ActionRegime::Uniform,
    };
    seed_line(args.seed);
    let trajs = sample_trajectories(&p, p.initial_belief(), regime, args.horizon, args.runs, args.seed)?;
    let mut w = create(&args.out)?;
    write_trajectory_csv(&mut w, &p, &trajs)?;
    w.flush()?;
    println!("trajectories: {} written to {}", trajs.len(), args.out.display());
    Ok(())
}

pub fn reach(args: &ReachArgs) -> Result<(), CliError> {
    let p = inputs::model(&args.model)?;
    let b0 = p.initial_belief().clone();
    let policy = inputs::policy(&p, args.policy.as_deref())?;
    let opts = CertifierOptions::default();
    seed_line(args.seed);
    let cert = attempt(&args.degree, |d| match args.mode {
        ReachModeArg::Single => reach_single(&p, &b0, d, ReachCondition::Invariance, &opts),
        ReachModeArg::PerAction => reach_per_action(&p, &b0, d, ReachCondition::Invariance, &opts),
        ReachModeArg::Partition => match &policy {
            Some(pol) => reach_policy(&p, &b0, pol, d, &opts),
            None => Err(CertError::InvalidInput("--mode partition needs --policy".into())),
        },
    })?;
    println!("certified: degree {} rounds {} objective {:e}", cert.degree, cert.rounds, cert.objective);
    finish(Certificate::Reach(cert.clone()), &p, &args.cert, args.seed)?;

    let regime = policy.as_ref().map_or(ActionRegime::Uniform, ActionRegime::Policy);
    let cloud = reach_sample(&p, &b0, regime, args.horizon, args.runs, args.seed)?;
    let worst = cloud.iter().map(|b| cert.membership_margin(b)).fold(f64::INFINITY, f64::min);
    println!("cloud: {} beliefs, worst membership margin {worst:e}", cloud.len());
    if let Some(path) = args.out.first() {
        let mut w = create(path)?;
        write_cloud_csv(&mut w, p.num_states(), &cloud)?;
        w.flush()?;
    }
    if let Some(path) = args.out.get(1) {
        let n = p.num_states();
        if grid_size(n, args.grid) > MAX_GRID_POINTS {
            return Err(CliError::Input(format!("grid of {} states at {} subdivisions is too large; lower --grid", n, args.grid)));
        }
        let mut w = create(path)?;
        write_set_csv(&mut w, n, args.grid, |b| cert.value(b), |b| cert.membership_margin(b))?;
        w.flush()?;
    }
    Ok(())
}

struct Barrier {
    pomdp: Pomdp,
    initial: certifier::InitialSet,
    mode: BarrierMode,
    policy: Option<pomdp_core::PolicyPartition>,
}

fn barrier_inputs(args: &BarrierArgs) -> Result<Barrier, CliError> {
    let pomdp = inputs::model(&args.model)?;
    let initial = inputs::initial_set(&pomdp, args)?;
    let policy = inputs::policy(&pomdp, args.policy.as_deref())?;
    let mode = match args.mode {
        BarrierModeArg::Monolithic => BarrierMode::Monolithic,
        BarrierModeArg::PerAction => BarrierMode::PerActionHull,
        BarrierModeArg::Partition => BarrierMode::PerPartition,
    };
    if mode == BarrierMode::PerPartition && policy.is_none() {
        return Err(CliError::Input("--mode partition needs --policy".into()));
    }
    Ok(Barrier { pomdp, initial, mode, policy })
}

fn report_barrier(c: &BarrierCertificate) {
    let vacuous = c.vacuous.iter().filter(|&&v| v).count();
    println!(
        "certified: degree {} horizon {} functions {} vacuous pieces {}/{}",
        c.degree,
        c.horizon,
        c.functions.len(),
        vacuous,
        c.vacuous.len()
    );
}

pub fn verify_safety_cmd(args: &SafetyArgs) -> Result<(), CliError> {
    let b = barrier_inputs(&args.barrier)?;
    let (states, lambda) = inputs::safety(&b.pomdp, &args.unsafe_states, args.lambda)?;
    let opts = CertifierOptions::default();
    seed_line(args.barrier.seed);
    let c = attempt(&args.barrier.degree, |d| {
        verify_safety(&b.pomdp, &b.initial, &states, lambda, args.barrier.tau, d, b.mode, b.policy.as_ref(), &opts)
    })?;
    report_barrier(&c);
    finish(c.into(), &b.pomdp, &args.cert, args.barrier.seed)?;
    Ok(())
}

pub fn verify_opt_cmd(args: &OptArgs) -> Result<(), CliError> {
    let b = barrier_inputs(&args.barrier)?;
    let rewards = inputs::rewards(&b.pomdp, args.rewards.as_deref(), args.reward_const)?;
    let tube = inputs::tube(args.tube.as_deref())?;
    let opts = CertifierOptions::default();
    seed_line(args.barrier.seed);
    let c = attempt(&args.barrier.degree, |d| {
        verify_optimality(&b.pomdp, &b.initial, &rewards, args.gamma, tube.as_ref(), args.barrier.tau, d, b.mode, b.policy.as_ref(), &opts)
    })?;
    report_barrier(&c);
    finish(c.into(), &b.pomdp, &args.cert, args.barrier.seed)?;
    Ok(())
}

pub fn build_model(args: &BuildArgs) -> Result<(), CliError> {
    let lattice = (args.width, args.height, args.start.as_str(), args.target.as_str());
    let p = inputs::builtin(&args.model, Some(lattice))?
        .ok_or_else(|| CliError::Input(format!("unknown model `{}`; expected ad, ad-low or lattice", args.model)))?;
    inputs::write(&args.out, write_pomdp(&p).as_bytes())?;
    println!(
        "model: {} states, {} actions, {} observations written to {}",
        p.num_states(),
        p.num_actions(),
        p.num_observations(),
        args.out.display()
    );
    Ok(())
}

fn exact_degree(args: &BarrierArgs) -> Result<u32, CliError> {
    args.degree.degree.ok_or_else(|| CliError::Input("export needs --degree".into()))
}

pub fn export_lp(args: &ExportArgs) -> Result<(), CliError> {
    let opts = CertifierOptions::default();
    let lp = match &args.program {
        ExportProgram::Reach(r) => {
            let p = inputs::model(&r.model)?;
            let policy = inputs::policy(&p, r.policy.as_deref())?;
            reach_program(&p, p.initial_belief(), policy.as_ref(), r.degree, ReachCondition::Invariance, &opts)?
        }
        ExportProgram::Safety(s) => {
            let b = barrier_inputs(&s.barrier)?;
            let (states, lambda) = inputs::safety(&b.pomdp, &s.unsafe_states, s.lambda)?;
            let prop = UnsafeSet::Safety { states, lambda };
            barrier_program(&b.pomdp, &b.initial, &prop, s.barrier.tau, exact_degree(&s.barrier)?, b.mode, b.policy.as_ref(), &opts)?
        }
        ExportProgram::Opt(o) => {
            let b = barrier_inputs(&o.barrier)?;
            let rewards = inputs::rewards(&b.pomdp, o.rewards.as_deref(), o.reward_const)?;
            let tube = match inputs::tube(o.tube.as_deref())? {
                Some(t) => t,
                None => Polynomial::constant(variables(&["t"]), o.gamma / f64::from(o.barrier.tau + 1)),
            };
            let prop = UnsafeSet::Optimality { rewards, gamma: o.gamma, tube };
            barrier_program(&b.pomdp, &b.initial, &prop, o.barrier.tau, exact_degree(&o.barrier)?, b.mode, b.policy.as_ref(), &opts)?
        }
    };
    match &args.out {
        Some(path) => {
            let mut w = create(path)?;
            write_mps(&lp, &mut w)?;
            w.flush()?;
            println!("program: {} variables, {} constraints written to {}", lp.num_vars(), lp.num_constraints(), path.display());
        }
        None => write_mps(&lp, std::io::stdout().lock())?,
    }
    Ok(())
}

pub fn check_cert(args: &CheckArgs) -> Result<(), CliError> {
    let p = inputs::load_model(&args.model)?;
    let text = inputs::read(&args.cert)?;
    let cert = certifier::parse_certificate(&text, &p)?;
    seed_line(args.seed);
    let ev = validate_certificate(&cert, &p, args.samples, args.seed)?;
    for line in ev.summary_lines() {
        println!("{line}");
    }
    println!("valid: {}", args.cert.display());
    Ok(())
}
