use poly_algebra::{compose_cleared, monomial_basis, parse_polynomial, variables, Monomial, Polynomial, RationalMap, Variables};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn random_poly(rng: &mut ChaCha8Rng, vars: &Variables, degree: u32) -> Polynomial {
    let basis = monomial_basis(vars.len(), degree);
    let mut terms = Vec::new();
    for m in basis {
        if rng.random_bool(0.7) {
            terms.push((m, rng.random_range(-3.0..3.0)));
        }
    }
    Polynomial::from_terms(vars.clone(), terms)
}

/// Term-by-term sum with `powi`, independent of the library's evaluator.
fn brute_eval(p: &Polynomial, x: &[f64]) -> f64 {
    p.terms().map(|(m, c)| c * m.exponents().zip(x).map(|(e, xi)| xi.powi(e as i32)).product::<f64>()).sum()
}

fn simplex_point(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    let w: Vec<f64> = (0..n).map(|_| -rng.random_range(1e-12f64..1.0).ln()).collect();
    let s: f64 = w.iter().sum();
    w.iter().map(|v| v / s).collect()
}

#[test]
fn eval_matches_brute_force_sum() {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let vars = variables(&["b1", "b2", "b3"]);
    let p = random_poly(&mut rng, &vars, 4);
    for _ in 0..100 {
        let x: Vec<f64> = (0..3).map(|_| rng.random_range(-1.0..1.0)).collect();
        assert!((p.eval(&x).unwrap() - brute_eval(&p, &x)).abs() < 1e-12);
    }
}

#[test]
fn product_matches_product_of_evaluations() {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let vars = variables(&["b1", "b2"]);
    let p = random_poly(&mut rng, &vars, 3);
    let q = random_poly(&mut rng, &vars, 3);
    let pq = &p * &q;
    for _ in 0..50 {
        let x: Vec<f64> = (0..2).map(|_| rng.random_range(-1.0..1.0)).collect();
        let expect = p.eval(&x).unwrap() * q.eval(&x).unwrap();
        assert!((pq.eval(&x).unwrap() - expect).abs() < 1e-10);
    }
}

fn random_map(rng: &mut ChaCha8Rng, vars: &Variables) -> RationalMap {
    // Images of the simplex stay in the simplex: M_i and N - sum M_i are
    // nonnegative combinations of the barycentric coordinates.
    let k = vars.len();
    let bary: Vec<Polynomial> = (0..=k)
        .map(|i| {
            if i < k {
                Polynomial::var(vars.clone(), i)
            } else {
                let s = (0..k).fold(Polynomial::zero(vars.clone()), |acc, j| &acc + &Polynomial::var(vars.clone(), j));
                &Polynomial::constant(vars.clone(), 1.0) - &s
            }
        })
        .collect();
    let comb =
        |rng: &mut ChaCha8Rng| bary.iter().fold(Polynomial::zero(vars.clone()), |acc, b| &acc + &b.scale(&rng.random_range(0.05..1.0)));
    let mut nums = Vec::new();
    for _ in 0..k {
        nums.push(comb(rng));
    }
    let rest = comb(rng);
    let den = nums.iter().fold(rest, |acc, m| &acc + m);
    RationalMap::new(nums, den).unwrap()
}

#[test]
fn compose_cleared_matches_direct_rational_evaluation() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let vars = variables(&["x1", "x2"]);
    for _ in 0..5 {
        let v = random_poly(&mut rng, &vars, 3);
        let f = random_map(&mut rng, &vars);
        let cleared = compose_cleared(&v, &f);
        let d = v.degree() as i32;
        assert!(cleared.degree() <= v.degree());
        for _ in 0..200 {
            let b = simplex_point(&mut rng, 3);
            let x = &b[..2];
            let n = brute_eval(f.denominator(), x);
            let img: Vec<f64> = f.numerators().iter().map(|m| brute_eval(m, x) / n).collect();
            let expect = n.powi(d) * brute_eval(&v, &img);
            assert!((cleared.eval(x).unwrap() - expect).abs() < 1e-9);
        }
    }
}

#[test]
fn rational_mode_reproduces_float_mode() {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let vars = variables(&["x1", "x2"]);
    let p = random_poly(&mut rng, &vars, 3).scale(&300.0);
    let q = random_poly(&mut rng, &vars, 2);
    let f = random_map(&mut rng, &vars);
    let float = compose_cleared(&(&p * &q), &f);
    let exact = compose_cleared(&(&p.to_rational() * &q.to_rational()), &f.to_rational()).to_f64();
    let diff = &float - &exact;
    assert!(diff.max_abs_coeff() < 1e-9, "{}", diff.max_abs_coeff());
}

fn arb_poly() -> impl Strategy<Value = Polynomial> {
    let vars = variables(&["b1", "b2"]);
    let basis = monomial_basis(2, 3);
    proptest::collection::vec(proptest::option::of(-5.0..5.0f64), basis.len()).prop_map(move |cs| {
        let terms = basis.iter().cloned().zip(cs).filter_map(|(m, c)| c.map(|c| (m, c)));
        Polynomial::from_terms(vars.clone(), terms)
    })
}

fn at(p: &Polynomial, x: &[f64]) -> f64 {
    p.eval(x).unwrap()
}

proptest! {
    #[test]
    fn ring_axioms(p in arb_poly(), q in arb_poly(), r in arb_poly(), x in -1.0..1.0f64, y in -1.0..1.0f64) {
        let pt = [x, y];
        let close = |a: f64, b: f64| (a - b).abs() <= 1e-10 * (1.0 + a.abs().max(b.abs()));
        prop_assert!(close(at(&(&p + &q), &pt), at(&(&q + &p), &pt)));
        prop_assert!(close(at(&(&p * &q), &pt), at(&(&q * &p), &pt)));
        prop_assert!(close(at(&(&(&p + &q) + &r), &pt), at(&(&p + &(&q + &r)), &pt)));
        prop_assert!(close(at(&(&(&p * &q) * &r), &pt), at(&(&p * &(&q * &r)), &pt)));
        prop_assert!(close(at(&(&p * &(&q + &r)), &pt), at(&(&(&p * &q) + &(&p * &r)), &pt)));
    }

    #[test]
    fn text_round_trip(p in arb_poly()) {
        let back = parse_polynomial(&p.to_string(), p.vars()).unwrap();
        prop_assert_eq!(back, p);
    }

    #[test]
    fn no_zero_terms_and_cached_degree(p in arb_poly(), q in arb_poly()) {
        let s = &p - &q;
        prop_assert!(s.terms().all(|(_, c)| *c != 0.0));
        let d = s.terms().map(|(m, _)| m.degree()).max().unwrap_or(0);
        prop_assert_eq!(s.degree(), d);
        let z = &p - &p;
        prop_assert!(z.is_zero());
    }
}

#[test]
fn monomial_order_is_graded_lex() {
    let m = |e: &[u32]| Monomial::from_exponents(e);
    assert!(m(&[0, 0]) < m(&[1, 0]));
    assert!(m(&[1, 0]) < m(&[0, 1]));
    assert!(m(&[0, 1]) < m(&[2, 0]));
    assert!(m(&[2, 0]) < m(&[1, 1]));
}
