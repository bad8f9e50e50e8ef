use lp_core::{read_mps, solve, verify_farkas, write_mps, LinearProgram, LpError, PivotRule, Relation, SolveOptions, Status, VarKind};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn opts() -> SolveOptions {
    SolveOptions::default()
}

#[test]
fn maximize_single_variable() {
    let mut lp = LinearProgram::new();
    let x = lp.add_var("x", VarKind::NonNegative);
    lp.add_constraint("cap", [(x, 1.0)], Relation::Le, 1.0);
    lp.set_objective([(x, -1.0)]);
    let sol = solve(&lp, &opts()).unwrap();
    assert_eq!(sol.status, Status::Feasible);
    assert!((sol.assignment[0] - 1.0).abs() < 1e-12);
    assert!((sol.objective_value + 1.0).abs() < 1e-12);
}

#[test]
fn contradictory_bounds_are_infeasible_with_certificate() {
    let mut lp = LinearProgram::new();
    let x = lp.add_var("x", VarKind::Free);
    lp.add_constraint("lo", [(x, 1.0)], Relation::Ge, 1.0);
    lp.add_constraint("hi", [(x, 1.0)], Relation::Le, 0.0);
    let sol = solve(&lp, &opts()).unwrap();
    assert_eq!(sol.status, Status::Infeasible);
    assert!(verify_farkas(&lp, sol.farkas.as_ref().unwrap(), 1e-7));
}

#[test]
fn unbounded_is_reported() {
    let mut lp = LinearProgram::new();
    let x = lp.add_var("x", VarKind::NonNegative);
    let y = lp.add_var("y", VarKind::NonNegative);
    lp.add_constraint("r", [(x, 1.0), (y, -1.0)], Relation::Le, 1.0);
    lp.set_objective([(x, -1.0)]);
    assert_eq!(solve(&lp, &opts()).unwrap().status, Status::Unbounded);
}

#[test]
fn iteration_limit_is_distinct_from_infeasibility() {
    let mut lp = LinearProgram::new();
    let x = lp.add_var("x", VarKind::NonNegative);
    lp.add_constraint("r", [(x, 1.0)], Relation::Eq, 2.0);
    let o = SolveOptions { max_iters: 0, ..opts() };
    assert!(matches!(solve(&lp, &o), Err(LpError::IterationLimit(0))));
}

#[test]
fn empty_program_is_feasible() {
    let lp = LinearProgram::new();
    let sol = solve(&lp, &opts()).unwrap();
    assert_eq!(sol.status, Status::Feasible);
}

/// Infeasible by 1e-5, but feasible once the right-hand side is shifted.
fn barely_infeasible() -> LinearProgram {
    let mut lp = LinearProgram::new();
    let x = lp.add_var("x", VarKind::NonNegative);
    let y = lp.add_var("y", VarKind::NonNegative);
    lp.add_constraint("sum", [(x, 1.0), (y, 1.0)], Relation::Le, 1.0);
    lp.add_constraint("x", [(x, 1.0)], Relation::Ge, 0.6);
    lp.add_constraint("y", [(y, 1.0)], Relation::Ge, 0.4 + 1e-5);
    lp
}

#[test]
fn perturbation_does_not_hide_infeasibility() {
    for objective in [false, true] {
        let mut lp = barely_infeasible();
        if objective {
            lp.set_objective([(0, 1.0)]);
        }
        for rule in [PivotRule::Bland, PivotRule::Dantzig] {
            let o = SolveOptions { perturbation: 1e-3, rule, ..opts() };
            let sol = solve(&lp, &o).unwrap();
            assert_eq!(sol.status, Status::Infeasible, "objective {objective} {rule:?}");
            assert!(verify_farkas(&lp, sol.farkas.as_ref().unwrap(), 1e-7));
        }
    }
}

#[test]
fn perturbed_solve_matches_plain_solve_on_tight_programs() {
    let mut lp = barely_infeasible();
    lp.constraint_mut(2).rhs = 0.4;
    lp.set_objective([(0, 1.0)]);
    for p in [0.0, 1e-9, 1e-3] {
        let sol = solve(&lp, &SolveOptions { perturbation: p, ..opts() }).unwrap();
        assert_eq!(sol.status, Status::Feasible);
        assert!((sol.objective_value - 0.6).abs() < 1e-9, "perturbation {p}: {}", sol.objective_value);
    }
}

/// Random LP with box rows so the feasible region is bounded.
fn random_lp(rng: &mut ChaCha8Rng, n: usize, m: usize) -> LinearProgram {
    let mut lp = LinearProgram::new();
    for j in 0..n {
        let kind = if rng.random_bool(0.25) { VarKind::Free } else { VarKind::NonNegative };
        lp.add_var(format!("x{j}"), kind);
    }
    for j in 0..n {
        lp.add_constraint(format!("ub{j}"), [(j, 1.0)], Relation::Le, rng.random_range(1.0..5.0));
        if lp.var_kind(j) == VarKind::Free {
            lp.add_constraint(format!("lb{j}"), [(j, 1.0)], Relation::Ge, -rng.random_range(0.0..5.0));
        }
    }
    let extra = m.saturating_sub(lp.num_constraints());
    for i in 0..extra {
        let mut coeffs = Vec::new();
        for j in 0..n {
            if rng.random_bool(0.7) {
                coeffs.push((j, rng.random_range(-4i32..=4) as f64));
            }
        }
        let rel = match rng.random_range(0..6) {
            0 => Relation::Eq,
            1 | 2 => Relation::Ge,
            _ => Relation::Le,
        };
        lp.add_constraint(format!("c{i}"), coeffs, rel, rng.random_range(-6i32..=8) as f64);
    }
    lp.set_objective((0..n).map(|j| (j, rng.random_range(-5i32..=5) as f64)));
    lp
}

/// Solves a small dense square system; `None` if singular.
fn gauss(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Option<Vec<f64>> {
    let n = b.len();
    for c in 0..n {
        let p = (c..n).max_by(|&i, &j| a[i][c].abs().partial_cmp(&a[j][c].abs()).unwrap())?;
        if a[p][c].abs() < 1e-10 {
            return None;
        }
        a.swap(c, p);
        b.swap(c, p);
        for i in 0..n {
            if i != c {
                let f = a[i][c] / a[c][c];
                for k in c..n {
                    a[i][k] -= f * a[c][k];
                }
                b[i] -= f * b[c];
            }
        }
    }
    Some((0..n).map(|i| b[i] / a[i][i]).collect())
}

/// Best objective over all vertices, or `None` if no vertex is feasible.
fn vertex_enumeration(lp: &LinearProgram) -> Option<f64> {
    let n = lp.num_vars();
    let mut rows: Vec<(Vec<f64>, f64, bool)> = Vec::new();
    for c in lp.constraints() {
        let mut a = vec![0.0; n];
        for &(j, v) in &c.coeffs {
            a[j] = v;
        }
        rows.push((a, c.rhs, c.relation == Relation::Eq));
    }
    for j in 0..n {
        if lp.var_kind(j) == VarKind::NonNegative {
            let mut a = vec![0.0; n];
            a[j] = 1.0;
            rows.push((a, 0.0, false));
        }
    }
    let eqs: Vec<usize> = (0..rows.len()).filter(|&i| rows[i].2).collect();
    let others: Vec<usize> = (0..rows.len()).filter(|&i| !rows[i].2).collect();
    if eqs.len() > n {
        // Overdetermined equalities: fall back to any n-subset containing them all is impossible.
        return None;
    }
    let k = n - eqs.len();
    let mut best: Option<f64> = None;
    let mut idx: Vec<usize> = (0..k).collect();
    loop {
        if k <= others.len() {
            let active: Vec<usize> = eqs.iter().copied().chain(idx.iter().map(|&i| others[i])).collect();
            let a: Vec<Vec<f64>> = active.iter().map(|&i| rows[i].0.clone()).collect();
            let b: Vec<f64> = active.iter().map(|&i| rows[i].1).collect();
            if let Some(x) = gauss(a, b) {
                if lp.max_violation(&x) <= 1e-9 {
                    let v = lp.objective_value(&x);
                    best = Some(best.map_or(v, |b: f64| b.min(v)));
                }
            }
        } else {
            return best;
        }
        // Next k-combination of `others`.
        let mut i = k;
        loop {
            if i == 0 {
                return best;
            }
            i -= 1;
            if idx[i] < others.len() - k + i {
                idx[i] += 1;
                for t in i + 1..k {
                    idx[t] = idx[t - 1] + 1;
                }
                break;
            }
        }
        if k == 0 {
            return best;
        }
    }
}

#[test]
fn matches_vertex_enumeration_on_random_programs() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut infeasible = 0;
    for trial in 0..200 {
        let n = rng.random_range(1..=5);
        let m = rng.random_range(n..=8);
        let lp = random_lp(&mut rng, n, m);
        let oracle = vertex_enumeration(&lp);
        for rule in [PivotRule::Bland, PivotRule::Dantzig] {
            let sol = solve(&lp, &SolveOptions { rule, ..opts() }).unwrap();
            match oracle {
                Some(best) => {
                    assert_eq!(sol.status, Status::Feasible, "trial {trial}");
                    assert!((sol.objective_value - best).abs() < 1e-6, "trial {trial}: {} vs {best}", sol.objective_value);
                    assert!(lp.max_violation(&sol.assignment) < 1e-7);
                }
                None => {
                    assert_eq!(sol.status, Status::Infeasible, "trial {trial}");
                    assert!(verify_farkas(&lp, sol.farkas.as_ref().unwrap(), 1e-7), "trial {trial}");
                }
            }
        }
        if oracle.is_none() {
            infeasible += 1;
        }
    }
    assert!(infeasible > 5, "family should exercise infeasible programs, got {infeasible}");
}

#[test]
fn strong_duality_on_feasible_bounded_programs() {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let mut checked = 0;
    for _ in 0..200 {
        let lp = random_lp(&mut rng, 4, 8);
        let sol = solve(&lp, &opts()).unwrap();
        if sol.status != Status::Feasible {
            continue;
        }
        checked += 1;
        let y = sol.duals.as_ref().unwrap();
        let dual_obj: f64 = lp.constraints().iter().zip(y).map(|(c, yi)| c.rhs * yi).sum();
        assert!((dual_obj - sol.objective_value).abs() < 1e-6);
        let mut aty = vec![0.0; lp.num_vars()];
        for (c, &yi) in lp.constraints().iter().zip(y) {
            match c.relation {
                Relation::Le => assert!(yi <= 1e-9),
                Relation::Ge => assert!(yi >= -1e-9),
                Relation::Eq => {}
            }
            for &(j, a) in &c.coeffs {
                aty[j] += a * yi;
            }
        }
        let mut cost = vec![0.0; lp.num_vars()];
        for &(j, c) in lp.objective().unwrap() {
            cost[j] = c;
        }
        for j in 0..lp.num_vars() {
            let r = cost[j] - aty[j];
            match lp.var_kind(j) {
                VarKind::NonNegative => assert!(r >= -1e-7),
                VarKind::Free => assert!(r.abs() <= 1e-7),
            }
        }
    }
    assert!(checked > 50);
}

#[test]
fn pivoting_is_deterministic() {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    for _ in 0..20 {
        let lp = random_lp(&mut rng, 5, 9);
        let a = solve(&lp, &opts()).unwrap();
        let b = solve(&lp, &opts()).unwrap();
        assert_eq!(a.iterations, b.iterations);
        let bits = |v: &[f64]| v.iter().map(|x| x.to_bits()).collect::<Vec<_>>();
        assert_eq!(bits(&a.assignment), bits(&b.assignment));
    }
}

fn lp_from_seed(seed: u64) -> LinearProgram {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = rng.random_range(1..=6);
    let m = rng.random_range(n..=10);
    random_lp(&mut rng, n, m)
}

proptest! {
    #[test]
    fn row_scaling_keeps_status(seed in 0u64..10_000, row in 0usize..10, factor in 0.01f64..100.0) {
        let lp = lp_from_seed(seed);
        let mut scaled = lp.clone();
        let i = row % lp.num_constraints();
        let c = scaled.constraint_mut(i);
        c.coeffs.iter_mut().for_each(|(_, a)| *a *= factor);
        c.rhs *= factor;
        let a = solve(&lp, &opts()).unwrap();
        let b = solve(&scaled, &opts()).unwrap();
        prop_assert_eq!(a.status, b.status);
    }

    #[test]
    fn mps_round_trip(seed in 0u64..10_000, drop_objective: bool) {
        let mut lp = lp_from_seed(seed);
        if drop_objective {
            lp.clear_objective();
        }
        let mut buf = Vec::new();
        write_mps(&lp, &mut buf).unwrap();
        let back = read_mps(buf.as_slice()).unwrap();
        prop_assert_eq!(back.num_vars(), lp.num_vars());
        for j in 0..lp.num_vars() {
            prop_assert_eq!(back.var_kind(j), lp.var_kind(j));
        }
        for (c, d) in lp.constraints().iter().zip(back.constraints()) {
            prop_assert_eq!(&c.coeffs, &d.coeffs);
            prop_assert_eq!(c.relation, d.relation);
            prop_assert_eq!(c.rhs.to_bits(), d.rhs.to_bits());
        }
        let norm = |o: Option<&[(usize, f64)]>| o.filter(|c| !c.is_empty()).map(<[_]>::to_vec);
        prop_assert_eq!(norm(lp.objective()), norm(back.objective()));
        let a = solve(&lp, &opts()).unwrap();
        let b = solve(&back, &opts()).unwrap();
        prop_assert_eq!(a.status, b.status);
        if a.status == Status::Feasible {
            prop_assert!((a.objective_value - b.objective_value).abs() < 1e-9);
        }
    }
}

#[test]
fn mps_layout_of_small_programs() {
    let mut lp = LinearProgram::new();
    let x = lp.add_var("x", VarKind::NonNegative);
    lp.add_constraint("r", [(x, 2.0)], Relation::Le, 3.0);
    let mut buf = Vec::new();
    write_mps(&lp, &mut buf).unwrap();
    let text = String::from_utf8(buf).unwrap();
    let section = |name: &str| -> Vec<String> {
        let mut lines = text.lines().skip_while(|l| *l != name).skip(1);
        let mut out = Vec::new();
        for l in lines.by_ref() {
            if !l.starts_with(' ') {
                break;
            }
            out.push(l.to_string());
        }
        out
    };
    let rows = section("ROWS");
    assert_eq!(rows.len(), 2, "objective row plus one constraint row");
    assert_eq!(rows[0], " N  COST");
    assert_eq!(rows.iter().filter(|r| !r.contains("COST")).count(), 1);
    assert_eq!(section("COLUMNS").len(), 1);
    assert_eq!(section("COLUMNS")[0], "    C0000000  R0000000             2");

    let mut feas = LinearProgram::new();
    let y = feas.add_var("y", VarKind::Free);
    feas.add_constraint("r", [(y, 1.0)], Relation::Eq, 1.0);
    let mut buf = Vec::new();
    write_mps(&feas, &mut buf).unwrap();
    let text = String::from_utf8(buf).unwrap();
    assert!(text.contains(" N  COST"));
    assert!(text.contains(" FR BND       C0000000"));
    let back = read_mps(text.as_bytes()).unwrap();
    assert!(back.objective().is_none());
}

#[test]
fn mps_file_round_trip() {
    let lp = lp_from_seed(42);
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("p.mps");
    lp_core::export_mps(&lp, &path).unwrap();
    let back = lp_core::import_mps(&path).unwrap();
    assert_eq!(back.num_constraints(), lp.num_constraints());
}
