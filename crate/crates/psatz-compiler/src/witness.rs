use num::{BigRational, Signed, Zero};
use poly_algebra::{rational_from_f64, Monomial, Polynomial};

/// Numeric Gram matrix over a monomial half-basis.
#[derive(Clone, Debug, PartialEq)]
pub struct GramWitness {
    pub basis: Vec<Monomial>,
    pub matrix: Vec<Vec<f64>>,
}

impl GramWitness {
    /// Raises diagonal entries just enough that diagonal dominance holds in
    /// exact arithmetic, absorbing float rounding of the solver's rays.
    pub fn make_exactly_dominant(&mut self) {
        let k = self.basis.len();
        for i in 0..k {
            let need: BigRational =
                (0..k).filter(|&j| j != i).map(|j| rational_from_f64(self.matrix[i][j]).abs()).fold(BigRational::zero(), |a, b| a + b);
            let mut d = self.matrix[i][i].max(0.0);
            while rational_from_f64(d) < need {
                d = num::ToPrimitive::to_f64(&need).unwrap_or(d).max(d).next_up();
            }
            self.matrix[i][i] = d;
        }
    }

    /// Exact diagonal-dominance check; returns the smallest slack
    /// `G_ii - sum_{j != i} |G_ij|` as a float.
    pub fn dominance_slack(&self) -> (bool, f64) {
        let k = self.basis.len();
        let mut ok = true;
        let mut worst = f64::INFINITY;
        for i in 0..k {
            let off: BigRational =
                (0..k).filter(|&j| j != i).map(|j| rational_from_f64(self.matrix[i][j]).abs()).fold(BigRational::zero(), |a, b| a + b);
            let slack = rational_from_f64(self.matrix[i][i]) - off;
            if slack.is_negative() {
                ok = false;
            }
            worst = worst.min(num::ToPrimitive::to_f64(&slack).unwrap_or(f64::NEG_INFINITY));
        }
        (ok, if k == 0 { 0.0 } else { worst })
    }

    /// `z^T G z` in exact arithmetic.
    pub fn polynomial_exact(&self, vars: &poly_algebra::Variables) -> Polynomial<BigRational> {
        let k = self.basis.len();
        let mut p = Polynomial::zero(vars.clone());
        let two = BigRational::from_integer(2.into());
        for i in 0..k {
            for j in i..k {
                let v = rational_from_f64(self.matrix[i][j]);
                let v = if i == j { v } else { v * two.clone() };
                p.add_term(self.basis[i].mul(&self.basis[j]), v);
            }
        }
        p
    }

    pub fn polynomial(&self, vars: &poly_algebra::Variables) -> Polynomial {
        self.polynomial_exact(vars).to_f64()
    }
}

/// Everything needed to re-check `target - margin*weight = s0 + sum s_j g_j`.
#[derive(Clone, Debug, PartialEq)]
pub struct PsatzWitness {
    pub label: String,
    pub target: Polynomial,
    pub margin: f64,
    pub margin_weight: Polynomial,
    pub generators: Vec<Polynomial>,
    pub s0: GramWitness,
    pub multipliers: Vec<Option<GramWitness>>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct IdentityReport {
    /// Largest residual coefficient, computed exactly then rounded.
    pub max_abs_residual: f64,
    /// Sum of absolute residual coefficients.
    pub l1_residual: f64,
    pub diagonally_dominant: bool,
    pub min_dominance_slack: f64,
}

impl IdentityReport {
    pub fn passes(&self, tol: f64) -> bool {
        self.diagonally_dominant && self.max_abs_residual <= tol
    }
}

/// Recomputes the identity residual in rational arithmetic and checks every
/// Gram matrix for diagonal dominance.
pub fn check_identity(w: &PsatzWitness) -> IdentityReport {
    let vars = w.target.vars().clone();
    let mut residual = w.target.to_rational() - w.margin_weight.to_rational().scale(&rational_from_f64(w.margin));
    residual = residual - w.s0.polynomial_exact(&vars);
    let mut dd = w.s0.dominance_slack();
    for (g, s) in w.generators.iter().zip(&w.multipliers) {
        if let Some(s) = s {
            residual = residual - s.polynomial_exact(&vars) * g.to_rational();
            let (ok, slack) = s.dominance_slack();
            dd = (dd.0 && ok, dd.1.min(slack));
        }
    }
    let mut max_abs = 0.0f64;
    let mut l1 = BigRational::zero();
    for (_, c) in residual.terms() {
        let a = c.abs();
        max_abs = max_abs.max(num::ToPrimitive::to_f64(&a).unwrap_or(f64::INFINITY));
        l1 += a;
    }
    IdentityReport {
        max_abs_residual: max_abs,
        l1_residual: num::ToPrimitive::to_f64(&l1).unwrap_or(f64::INFINITY),
        diagonally_dominant: dd.0,
        min_dominance_slack: dd.1,
    }
}
