use lp_core::{verify_farkas, Relation, SolveOptions, Status};
use poly_algebra::{monomial_basis, parse_polynomial, variables, Monomial, Polynomial, Variables};
use proptest::prelude::*;
use psatz_compiler::{
    assemble_program, check_identity, dsos_relax, product_generators, simplex_generators, DsosForm, GramConstraint, LinPoly,
    PositivityConstraint, ProgramBuilder, PsatzError, PsatzOptions,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp1};

fn opts() -> SolveOptions {
    SolveOptions::default()
}

fn poly(text: &str, vars: &Variables) -> Polynomial {
    parse_polynomial(text, vars).unwrap()
}

/// Certifies `p >= margin` on `{g >= 0}`; returns the witness if feasible.
fn certify(p: &Polynomial, gens: Vec<Polynomial>, margin: f64, options: PsatzOptions) -> Option<psatz_compiler::PsatzWitness> {
    let mut b = ProgramBuilder::new(options);
    let c = PositivityConstraint::new("p", LinPoly::from_poly(p), gens).with_margin(margin);
    let h = b.add_positivity(&c).unwrap();
    let sol = b.solve(&opts()).unwrap();
    match sol.status {
        Status::Feasible => Some(b.witness(h, &sol.assignment)),
        Status::Infeasible => {
            assert!(verify_farkas(b.program(), sol.farkas.as_ref().unwrap(), 1e-7));
            None
        }
        Status::Unbounded => panic!("feasibility program cannot be unbounded"),
    }
}

#[test]
fn square_on_the_line() {
    let v = variables(&["x"]);
    for form in [DsosForm::ExtremeRays, DsosForm::AbsoluteValue] {
        let w = certify(&poly("x^2", &v), vec![], 0.0, PsatzOptions { form, ..Default::default() }).unwrap();
        assert_eq!(w.s0.basis.len(), 2);
        let g = &w.s0.matrix;
        assert!(g[0][0].abs() < 1e-9 && g[0][1].abs() < 1e-9 && (g[1][1] - 1.0).abs() < 1e-9);
        assert!(check_identity(&w).passes(1e-7));
    }
}

#[test]
fn linear_on_half_line() {
    let v = variables(&["x"]);
    let w = certify(&poly("x", &v), vec![poly("x", &v)], 0.0, PsatzOptions::default()).unwrap();
    let s1 = w.multipliers[0].as_ref().unwrap();
    assert!((s1.matrix[0][0] - 1.0).abs() < 1e-9);
    assert!(w.s0.matrix[0][0].abs() < 1e-9);
    assert!(check_identity(&w).passes(1e-7));
}

#[test]
fn shifted_linear_is_not_certifiable_with_constant_multipliers() {
    let v = variables(&["x"]);
    assert!(certify(&poly("x - 1", &v), vec![poly("x", &v)], 0.0, PsatzOptions::default()).is_none());
    // With constant multipliers s0 + s1*x = x - 1 forces s0 = -1 < 0; a
    // higher-degree s1 cannot help either since p(0) = -1 < 0.
    let w = certify(&poly("x - 1", &v), vec![poly("x", &v)], 0.0, PsatzOptions { degree_bound: Some(4), ..Default::default() });
    assert!(w.is_none());
}

#[test]
fn dsos_relax_shapes() {
    let mut lp = lp_core::LinearProgram::new();
    let g = GramConstraint::symbolic(&mut lp, "g", vec![Monomial::one(1)]);
    let rows = dsos_relax(&g, &mut lp);
    assert_eq!(rows.len(), 1);
    let r = &lp.constraints()[rows[0]];
    assert_eq!(r.relation, Relation::Ge);
    assert_eq!(r.rhs, 0.0);
    assert_eq!(r.coeffs, vec![(0, 1.0)]);
}

#[test]
fn dsos_accepts_perfect_square_and_rejects_indefinite_form() {
    let v = variables(&["x", "y"]);
    for form in [DsosForm::ExtremeRays, DsosForm::AbsoluteValue] {
        let o = PsatzOptions { form, ..Default::default() };
        let w = certify(&poly("(x + y)^2", &v), vec![], 0.0, o.clone()).unwrap();
        assert!(check_identity(&w).passes(1e-7));
        let bad = poly("x^2 + y^2 - 3*x*y", &v);
        assert_eq!(bad.eval(&[1.0, 1.0]).unwrap(), -1.0);
        assert!(certify(&bad, vec![], 0.0, o).is_none());
    }
}

#[test]
fn degree_mismatch_is_reported() {
    let v = variables(&["x"]);
    let mut b = ProgramBuilder::new(PsatzOptions::default());
    let c = PositivityConstraint::new("odd", LinPoly::from_poly(&poly("x^3", &v)), vec![]);
    assert!(matches!(b.add_positivity(&c), Err(PsatzError::DegreeMismatch { .. })));
}

#[test]
fn empty_and_duplicate_assemblies() {
    let b = assemble_program(ProgramBuilder::new(PsatzOptions::default()), &[]).unwrap();
    assert_eq!(b.program().num_constraints(), 0);
    assert_eq!(b.solve(&opts()).unwrap().status, Status::Feasible);

    let v = variables(&["x"]);
    let c = PositivityConstraint::new("c", LinPoly::from_poly(&poly("x + 0.5", &v)), vec![poly("x", &v)]);
    let one = assemble_program(ProgramBuilder::new(PsatzOptions::default()), std::slice::from_ref(&c)).unwrap();
    let two = assemble_program(ProgramBuilder::new(PsatzOptions::default()), &[c.clone(), c]).unwrap();
    let rows1: Vec<_> = one.program().constraints().iter().map(|r| (r.coeffs.len(), r.relation, r.rhs)).collect();
    let rows2: Vec<_> = two.program().constraints().iter().map(|r| (r.coeffs.len(), r.relation, r.rhs)).collect();
    assert_eq!(rows2.len(), 2 * rows1.len());
    assert_eq!(&rows2[..rows1.len()], &rows1[..]);
    assert_eq!(&rows2[rows1.len()..], &rows1[..]);
    assert_eq!(one.solve(&opts()).unwrap().status, two.solve(&opts()).unwrap().status);
}

/// 2-state, 1-action, 1-observation chain with b1' = b1/2 (column-stochastic
/// T = [[0.5, 0], [0.5, 1]]), eliminated coordinate x = b1, b0 = (0, 1).
/// Invariance of {V <= 1}, 0 <= V(b0) <= 1 and V <= 2 on the simplex, with
/// the slope of V maximized, recovers V proportional to b1.
#[test]
fn toy_lyapunov_program_recovers_linear_function() {
    let v = variables(&["x"]);
    let mut b = ProgramBuilder::new(PsatzOptions::default());
    let dv = b.decision_polynomial("V", &v, monomial_basis(1, 1));
    let vl = dv.to_linpoly();
    let gens = simplex_generators(&v, 1);
    let image = dv.map_linear(&v, |m| m.substitute(0, &poly("0.5*x", &v)));
    let one = LinPoly::from_poly(&Polynomial::constant(v.clone(), 1.0));
    b.add_positivity(&PositivityConstraint::new("inv", &one - &image, gens.clone())).unwrap();
    b.add_positivity(&PositivityConstraint::new("cap", &one.scale(2.0) - &vl, gens)).unwrap();
    let v0 = vl.coeff(&Monomial::one(1)).unwrap().clone();
    let mut row = v0.clone();
    row.constant -= 1.0;
    b.add_row("init", &row, Relation::Le);
    b.add_row("init_lo", &v0, Relation::Ge);
    b.set_objective(&vl.coeff(&Monomial::var(1, 0)).unwrap().scale(-1.0));
    let sol = b.solve(&opts()).unwrap();
    assert_eq!(sol.status, Status::Feasible);
    let value = dv.value(&sol.assignment);
    let (c, a) = (value.coeff(&Monomial::one(1)), value.coeff(&Monomial::var(1, 0)));

    // Grid oracle over V = a*x + c; linear constraints on [0, 1] are checked at the endpoints.
    let mut best = (f64::NEG_INFINITY, 0.0);
    for ia in -400..=400 {
        for ic in 0..=100 {
            let (ga, gc) = (ia as f64 / 100.0, ic as f64 / 100.0);
            let ok = [0.0, 1.0].iter().all(|&x| 1.0 - (ga * x / 2.0 + gc) >= -1e-12 && 2.0 - (ga * x + gc) >= -1e-12);
            if ok && ga > best.0 {
                best = (ga, gc);
            }
        }
    }
    assert!((a - best.0).abs() < 1e-6 && (c - best.1).abs() < 1e-6, "LP ({a}, {c}) vs grid {best:?}");
    assert!(c.abs() < 1e-9 && (a - 2.0).abs() < 1e-9, "V = 2*b1");
}

fn dirichlet(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    let w: Vec<f64> = (0..n).map(|_| Exp1.sample(rng)).collect();
    let s: f64 = w.iter().sum();
    w.into_iter().map(|x| x / s).collect()
}

fn random_poly(rng: &mut ChaCha8Rng, vars: &Variables, degree: u32, shift: f64) -> Polynomial {
    let mut terms = Vec::new();
    for m in monomial_basis(vars.len(), degree) {
        let c = rng.random_range(-1.0..1.0) + if m.is_one() { shift } else { 0.0 };
        terms.push((m, c));
    }
    Polynomial::from_terms(vars.clone(), terms)
}

#[test]
fn certified_polynomials_are_nonnegative_on_the_simplex() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let v = variables(&["x1", "x2"]);
    let gens = product_generators(&simplex_generators(&v, 2), 2);
    let mut certified = 0;
    for _ in 0..30 {
        let p = random_poly(&mut rng, &v, 3, 1.0);
        if let Some(w) = certify(&p, gens.clone(), 1e-6, PsatzOptions::default()) {
            certified += 1;
            assert!(check_identity(&w).passes(1e-7));
            for _ in 0..2000 {
                let b = dirichlet(&mut rng, 3);
                assert!(p.eval(&b[..2]).unwrap() >= -1e-8);
            }
        }
    }
    assert!(certified >= 10, "only {certified} certified");
}

#[test]
fn both_dsos_forms_agree_on_feasibility() {
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    let v = variables(&["x1", "x2"]);
    let gens = simplex_generators(&v, 2);
    let mut seen = [0, 0];
    for _ in 0..20 {
        let p = random_poly(&mut rng, &v, 2, 0.6);
        let a = certify(&p, gens.clone(), 0.0, PsatzOptions { form: DsosForm::ExtremeRays, ..Default::default() });
        let b = certify(&p, gens.clone(), 0.0, PsatzOptions { form: DsosForm::AbsoluteValue, ..Default::default() });
        assert_eq!(a.is_some(), b.is_some());
        seen[a.is_some() as usize] += 1;
    }
    assert!(seen[0] > 0 && seen[1] > 0, "{seen:?}");
}

#[test]
fn raising_degree_caps_keeps_feasibility() {
    let mut rng = ChaCha8Rng::seed_from_u64(13);
    let v = variables(&["x1", "x2"]);
    let gens = simplex_generators(&v, 2);
    for _ in 0..15 {
        let p = random_poly(&mut rng, &v, 2, 0.8);
        let base = certify(&p, gens.clone(), 0.0, PsatzOptions { degree_bound: Some(2), ..Default::default() });
        let raised = certify(&p, gens.clone(), 0.0, PsatzOptions { degree_bound: Some(4), ..Default::default() });
        if base.is_some() {
            assert!(raised.is_some());
        }
    }
}

#[test]
fn product_generators_are_deduplicated_and_bounded() {
    let v = variables(&["x"]);
    let gens = simplex_generators(&v, 1);
    let prods = product_generators(&gens, 2);
    // x, 1-x, x^2, x(1-x), (1-x)^2
    assert_eq!(prods.len(), 5);
    assert!(prods.iter().all(|p| p.degree() <= 2));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]
    #[test]
    fn perturbed_witness_fails_identity(seed in 0u64..1000) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let v = variables(&["x1"]);
        let p = random_poly(&mut rng, &v, 2, 2.5);
        let gens = simplex_generators(&v, 1);
        if let Some(mut w) = certify(&p, gens, 0.0, PsatzOptions::default()) {
            prop_assert!(check_identity(&w).passes(1e-7));
            w.target = &w.target + &Polynomial::constant(v.clone(), 0.1);
            prop_assert!(!check_identity(&w).passes(1e-7));
        }
    }
}
