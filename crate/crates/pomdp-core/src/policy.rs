use poly_algebra::{parse_polynomial, variables, Polynomial, Variables};

use crate::{Pomdp, PomdpError};

/// Semialgebraic policy: the first region whose guard is `<= 0` picks the
/// action, otherwise the default applies.
#[derive(Clone, Debug)]
pub struct PolicyPartition {
    regions: Vec<(Polynomial, usize)>,
    default_action: usize,
    vars: Variables,
}

/// Names `b1..bn` of the full belief coordinates.
pub fn full_belief_vars(n: usize) -> Variables {
    let names: Vec<String> = (1..=n).map(|i| format!("b{i}")).collect();
    variables(&names)
}

impl PolicyPartition {
    /// Guards are polynomials over `b1..bn` (not eliminated).
    pub fn new(pomdp: &Pomdp, regions: Vec<(Polynomial, usize)>, default_action: usize) -> Result<Self, PomdpError> {
        let n = pomdp.num_states();
        let vars = full_belief_vars(n);
        let na = pomdp.num_actions();
        if regions.is_empty() {
            return Err(PomdpError::InvalidPolicy("region list is empty".into()));
        }
        let mut out = Vec::with_capacity(regions.len());
        for (g, a) in regions {
            if a >= na {
                return Err(PomdpError::InvalidPolicy(format!("action index {a} out of range")));
            }
            let g = g.in_variables(&vars).map_err(|_| PomdpError::InvalidPolicy(format!("guard `{g}` uses variables outside b1..b{n}")))?;
            out.push((g, a));
        }
        if default_action >= na {
            return Err(PomdpError::InvalidPolicy(format!("action index {default_action} out of range")));
        }
        Ok(PolicyPartition { regions: out, default_action, vars })
    }

    /// Policy that always plays `a`.
    pub fn constant(pomdp: &Pomdp, a: usize) -> Result<Self, PomdpError> {
        let vars = full_belief_vars(pomdp.num_states());
        Self::new(pomdp, vec![(Polynomial::constant(vars, -1.0), a)], a)
    }

    pub fn regions(&self) -> &[(Polynomial, usize)] {
        &self.regions
    }

    pub fn default_action(&self) -> usize {
        self.default_action
    }

    pub fn vars(&self) -> &Variables {
        &self.vars
    }

    /// Index of the region that applies at `b`; `regions().len()` for the default.
    pub fn region_index(&self, b: &[f64]) -> usize {
        self.regions.iter().position(|(g, _)| g.eval(b).expect("belief dimension matches policy") <= 0.0).unwrap_or(self.regions.len())
    }

    /// Action of region `k` as numbered by [`Self::region_index`].
    pub fn region_action(&self, k: usize) -> usize {
        self.regions.get(k).map_or(self.default_action, |r| r.1)
    }

    pub fn policy_action(&self, b: &[f64]) -> usize {
        self.region_action(self.region_index(b))
    }

    /// Text form accepted by [`parse_policy`].
    pub fn to_text(&self, pomdp: &Pomdp) -> String {
        let mut s = String::new();
        for (g, a) in &self.regions {
            s.push_str(&format!("region {g} -> {}\n", pomdp.actions[*a]));
        }
        s.push_str(&format!("default -> {}\n", pomdp.actions[self.default_action]));
        s
    }
}

/// Parses `region <poly> -> <action>` lines followed by `default -> <action>`.
/// Blank lines and `#` comments are ignored.
pub fn parse_policy(pomdp: &Pomdp, text: &str) -> Result<PolicyPartition, PomdpError> {
    let vars = full_belief_vars(pomdp.num_states());
    let mut regions = Vec::new();
    let mut default = None;
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let bad = |msg: String| PomdpError::InvalidPolicy(format!("line {}: {msg}", lineno + 1));
        if default.is_some() {
            return Err(bad("lines after `default`".into()));
        }
        let (lhs, action) = line.rsplit_once("->").ok_or_else(|| bad("missing `->`".into()))?;
        let a = pomdp.action_index(action.trim())?;
        let lhs = lhs.trim();
        if lhs == "default" {
            default = Some(a);
        } else if let Some(guard) = lhs.strip_prefix("region") {
            let g = parse_polynomial(guard.trim(), &vars).map_err(|e| bad(e.to_string()))?;
            regions.push((g, a));
        } else {
            return Err(bad(format!("expected `region` or `default`, got `{lhs}`")));
        }
    }
    let default = default.ok_or_else(|| PomdpError::InvalidPolicy("missing `default` line".into()))?;
    PolicyPartition::new(pomdp, regions, default)
}

/// Ad-scheduling policy: no ads while `b1 + b2 <= 0.5`, ads otherwise.
pub fn ad_threshold_policy(pomdp: &Pomdp) -> Result<PolicyPartition, PomdpError> {
    let vars = full_belief_vars(pomdp.num_states());
    let g = parse_polynomial("b1 + b2 - 0.5", &vars).map_err(|e| PomdpError::InvalidPolicy(e.to_string()))?;
    PolicyPartition::new(pomdp, vec![(g, 0)], 1)
}
