use std::fmt::Write as _;

use crate::LpError;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum VarKind {
    Free,
    NonNegative,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Relation {
    Le,
    Ge,
    Eq,
}

impl Relation {
    pub fn symbol(self) -> &'static str {
        match self {
            Relation::Le => "<=",
            Relation::Ge => ">=",
            Relation::Eq => "=",
        }
    }
}

/// One row `sum coeffs[k].1 * x[coeffs[k].0]  (relation)  rhs`.
#[derive(Clone, Debug, PartialEq)]
pub struct Constraint {
    pub name: String,
    pub coeffs: Vec<(usize, f64)>,
    pub relation: Relation,
    pub rhs: f64,
}

/// A linear program with an optional minimization objective.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct LinearProgram {
    names: Vec<String>,
    kinds: Vec<VarKind>,
    constraints: Vec<Constraint>,
    objective: Option<Vec<(usize, f64)>>,
}

impl LinearProgram {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add_var(&mut self, name: impl Into<String>, kind: VarKind) -> usize {
        self.names.push(name.into());
        self.kinds.push(kind);
        self.names.len() - 1
    }

    /// Adds a row; repeated indices are summed and zero coefficients dropped.
    pub fn add_constraint(
        &mut self,
        name: impl Into<String>,
        coeffs: impl IntoIterator<Item = (usize, f64)>,
        relation: Relation,
        rhs: f64,
    ) -> usize {
        let coeffs = merge(coeffs);
        self.constraints.push(Constraint { name: name.into(), coeffs, relation, rhs });
        self.constraints.len() - 1
    }

    /// Sets `minimize sum c_j x_j`.
    pub fn set_objective(&mut self, coeffs: impl IntoIterator<Item = (usize, f64)>) {
        self.objective = Some(merge(coeffs));
    }

    pub fn clear_objective(&mut self) {
        self.objective = None;
    }

    pub fn num_vars(&self) -> usize {
        self.names.len()
    }

    pub fn num_constraints(&self) -> usize {
        self.constraints.len()
    }

    pub fn var_name(&self, j: usize) -> &str {
        &self.names[j]
    }

    pub fn var_kind(&self, j: usize) -> VarKind {
        self.kinds[j]
    }

    pub fn constraints(&self) -> &[Constraint] {
        &self.constraints
    }

    pub fn constraint_mut(&mut self, i: usize) -> &mut Constraint {
        &mut self.constraints[i]
    }

    pub fn objective(&self) -> Option<&[(usize, f64)]> {
        self.objective.as_deref()
    }

    pub fn objective_value(&self, x: &[f64]) -> f64 {
        self.objective.as_ref().map_or(0.0, |c| c.iter().map(|&(j, a)| a * x[j]).sum())
    }

    /// Infinity-norm of constraint and sign violations at `x`.
    pub fn max_violation(&self, x: &[f64]) -> f64 {
        let mut worst = 0.0f64;
        for (j, k) in self.kinds.iter().enumerate() {
            if *k == VarKind::NonNegative {
                worst = worst.max(-x[j]);
            }
        }
        for c in &self.constraints {
            let lhs: f64 = c.coeffs.iter().map(|&(j, a)| a * x[j]).sum();
            let v = match c.relation {
                Relation::Le => lhs - c.rhs,
                Relation::Ge => c.rhs - lhs,
                Relation::Eq => (lhs - c.rhs).abs(),
            };
            worst = worst.max(v);
        }
        worst
    }

    /// Checks that indices are in range and coefficients finite.
    pub fn validate(&self) -> Result<(), LpError> {
        let n = self.names.len();
        let check = |coeffs: &[(usize, f64)], what: &str| -> Result<(), LpError> {
            for &(j, a) in coeffs {
                if j >= n {
                    return Err(LpError::Malformed(format!("{what} references undeclared variable {j}")));
                }
                if !a.is_finite() {
                    return Err(LpError::Malformed(format!("{what} has non-finite coefficient")));
                }
            }
            Ok(())
        };
        for c in &self.constraints {
            check(&c.coeffs, &c.name)?;
            if !c.rhs.is_finite() {
                return Err(LpError::Malformed(format!("{} has non-finite right-hand side", c.name)));
            }
        }
        if let Some(obj) = &self.objective {
            check(obj, "objective")?;
        }
        Ok(())
    }

    /// Human-readable dump, one constraint per line.
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let row = |coeffs: &[(usize, f64)]| -> String {
            if coeffs.is_empty() {
                return "0".into();
            }
            let mut out = String::new();
            for (k, &(j, a)) in coeffs.iter().enumerate() {
                if k == 0 {
                    if a < 0.0 {
                        out.push('-');
                    }
                } else {
                    out.push_str(if a < 0.0 { " - " } else { " + " });
                }
                write!(out, "{} {}", a.abs(), self.names[j]).unwrap();
            }
            out
        };
        match &self.objective {
            Some(c) => writeln!(s, "minimize {}", row(c)).unwrap(),
            None => writeln!(s, "feasibility").unwrap(),
        }
        for c in &self.constraints {
            writeln!(s, "{}: {} {} {}", c.name, row(&c.coeffs), c.relation.symbol(), c.rhs).unwrap();
        }
        for (name, kind) in self.names.iter().zip(&self.kinds) {
            match kind {
                VarKind::Free => writeln!(s, "{name} free").unwrap(),
                VarKind::NonNegative => writeln!(s, "{name} >= 0").unwrap(),
            }
        }
        s
    }
}

fn merge(coeffs: impl IntoIterator<Item = (usize, f64)>) -> Vec<(usize, f64)> {
    let mut v: Vec<(usize, f64)> = coeffs.into_iter().collect();
    v.sort_by_key(|&(j, _)| j);
    let mut out: Vec<(usize, f64)> = Vec::with_capacity(v.len());
    for (j, a) in v {
        match out.last_mut() {
            Some((k, b)) if *k == j => *b += a,
            _ => out.push((j, a)),
        }
    }
    out.retain(|&(_, a)| a != 0.0);
    out
}
