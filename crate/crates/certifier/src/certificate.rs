//! Line-oriented text form of certificates. Polynomials use the parser's
//! syntax and floats are written in shortest round-trip form, so a parsed
//! certificate re-validates bit for bit.

use std::fmt::Write as _;

use poly_algebra::{parse_polynomial, variables, Monomial, Polynomial, Variables};
use pomdp_core::{full_belief_vars, Belief, PolicyPartition, Pomdp};
use psatz_compiler::{GramWitness, PsatzWitness};

use crate::barrier::{BarrierCertificate, BarrierMode, InitialSet, UnsafeSet};
use crate::reach::{ReachCertificate, ReachCondition, ReachMode};
use crate::validate::Evidence;
use crate::{CertError, Scope};

const HEADER: &str = "pomdp-cert certificate v1";

#[derive(Clone, Debug)]
pub enum Certificate {
    Reach(ReachCertificate),
    Barrier(BarrierCertificate),
}

impl From<ReachCertificate> for Certificate {
    fn from(c: ReachCertificate) -> Self {
        Certificate::Reach(c)
    }
}

impl From<BarrierCertificate> for Certificate {
    fn from(c: BarrierCertificate) -> Self {
        Certificate::Barrier(c)
    }
}

fn floats(xs: &[f64]) -> String {
    xs.iter().map(f64::to_string).collect::<Vec<_>>().join(" ")
}

fn scope_text(s: Scope) -> String {
    match s {
        Scope::All => "all".into(),
        Scope::Action(a) => format!("action {a}"),
        Scope::Region(r) => format!("region {r}"),
    }
}

fn monomial_text(m: &Monomial) -> String {
    let e: Vec<String> = m.exponents().map(|e| e.to_string()).collect();
    format!("[{}]", e.join(","))
}

fn write_gram(out: &mut String, g: &GramWitness) {
    let _ = writeln!(out, "gram {}", g.basis.len());
    let basis: Vec<String> = g.basis.iter().map(monomial_text).collect();
    let _ = writeln!(out, "basis: {}", basis.join(" "));
    for row in &g.matrix {
        let _ = writeln!(out, "row: {}", floats(row));
    }
}

fn write_witness(out: &mut String, w: &PsatzWitness) {
    let _ = writeln!(out, "witness {}", w.label);
    let _ = writeln!(out, "vars: {}", w.target.vars().join(" "));
    let _ = writeln!(out, "target: {}", w.target);
    let _ = writeln!(out, "margin: {}", w.margin);
    let _ = writeln!(out, "weight: {}", w.margin_weight);
    for g in &w.generators {
        let _ = writeln!(out, "generator: {g}");
    }
    write_gram(out, &w.s0);
    for m in &w.multipliers {
        match m {
            Some(g) => write_gram(out, g),
            None => out.push_str("gram none\n"),
        }
    }
    out.push_str("end\n");
}

fn write_policy(out: &mut String, p: &PolicyPartition) {
    for (g, a) in p.regions() {
        let _ = writeln!(out, "policy-region: {a} {g}");
    }
    let _ = writeln!(out, "policy-default: {}", p.default_action());
}

/// Text form of `cert`, with an evidence summary when given.
pub fn write_certificate(cert: &Certificate, evidence: Option<&Evidence>) -> String {
    let mut out = format!("{HEADER}\n");
    match cert {
        Certificate::Reach(c) => {
            let mode = match c.mode {
                ReachMode::Single => "single",
                ReachMode::PerAction => "per-action",
                ReachMode::PerPartition => "per-partition",
            };
            let cond = match c.condition {
                ReachCondition::Invariance => "invariance",
                ReachCondition::StrictDecrease => "strict-decrease",
            };
            let _ = writeln!(out, "kind: reach\nmode: {mode}\ncondition: {cond}");
            let _ = writeln!(out, "states: {}\ndegree: {}\nlevel: {}\ncap: {}", c.num_states(), c.degree, c.level, c.cap);
            let _ = writeln!(
                out,
                "margin: {}\nproduct-degree: {}\nrounds: {}\nobjective: {}",
                c.margin, c.product_degree, c.rounds, c.objective
            );
            let _ = writeln!(out, "initial: {}", floats(&c.initial));
            if let Some(p) = &c.policy {
                write_policy(&mut out, p);
            }
            for (f, s) in &c.functions {
                let _ = writeln!(out, "function {}: {f}", scope_text(*s));
            }
            for m in &c.multipliers {
                let _ = writeln!(out, "multiplier: {m}");
            }
            for w in &c.witnesses {
                write_witness(&mut out, w);
            }
        }
        Certificate::Barrier(c) => {
            let mode = match c.mode {
                BarrierMode::Monolithic => "monolithic",
                BarrierMode::PerActionHull => "per-action-hull",
                BarrierMode::PerPartition => "per-partition",
            };
            let _ = writeln!(out, "kind: barrier\nmode: {mode}");
            let _ = writeln!(out, "states: {}\ndegree: {}\nhorizon: {}", c.num_states(), c.degree, c.horizon);
            let _ = writeln!(out, "margin: {}\nproduct-degree: {}\ntime-degree: {}", c.margin, c.product_degree, c.time_degree);
            match &c.property {
                UnsafeSet::Safety { states, lambda } => {
                    let qs: Vec<String> = states.iter().map(usize::to_string).collect();
                    let _ = writeln!(out, "property: safety\nunsafe-states: {}\nlambda: {lambda}", qs.join(" "));
                }
                UnsafeSet::Optimality { rewards, gamma, tube } => {
                    let _ = writeln!(out, "property: optimality\ngamma: {gamma}\ntube: {tube}");
                    for r in rewards {
                        let _ = writeln!(out, "reward: {}", floats(r));
                    }
                }
            }
            match &c.initial {
                InitialSet::Point(b) => {
                    let _ = writeln!(out, "initial: {}", floats(b));
                }
                InitialSet::Polytope(gs) => {
                    for g in gs {
                        let _ = writeln!(out, "initial-constraint: {g}");
                    }
                }
            }
            if let Some(p) = &c.policy {
                write_policy(&mut out, p);
            }
            let flags: Vec<&str> = c.vacuous.iter().map(|&v| if v { "1" } else { "0" }).collect();
            let _ = writeln!(out, "vacuous: {}", flags.join(" "));
            for (f, s) in &c.functions {
                let _ = writeln!(out, "function {}: {f}", scope_text(*s));
            }
            for w in &c.witnesses {
                write_witness(&mut out, w);
            }
        }
    }
    if let Some(e) = evidence {
        for line in e.summary_lines() {
            let _ = writeln!(out, "evidence: {line}");
        }
    }
    out
}

struct Lines<'a> {
    lines: Vec<(usize, &'a str)>,
    pos: usize,
}

impl<'a> Lines<'a> {
    fn new(text: &'a str) -> Self {
        let lines =
            text.lines().enumerate().map(|(i, l)| (i + 1, l.trim())).filter(|(_, l)| !l.is_empty() && !l.starts_with('#')).collect();
        Lines { lines, pos: 0 }
    }

    fn line(&self) -> usize {
        self.lines.get(self.pos.saturating_sub(1)).map_or(0, |l| l.0)
    }

    fn err(&self, msg: impl Into<String>) -> CertError {
        CertError::Parse { line: self.line(), msg: msg.into() }
    }

    fn peek(&self) -> Option<&'a str> {
        self.lines.get(self.pos).map(|l| l.1)
    }

    fn next(&mut self) -> Result<&'a str, CertError> {
        let l = self.lines.get(self.pos).map(|l| l.1);
        self.pos += 1;
        l.ok_or_else(|| self.err("unexpected end of certificate"))
    }

    /// Next line split as `key: value`.
    fn kv(&mut self) -> Result<(&'a str, &'a str), CertError> {
        let l = self.next()?;
        let (k, v) = l.split_once(':').ok_or_else(|| self.err(format!("expected `key: value`, found `{l}`")))?;
        Ok((k.trim(), v.trim()))
    }

    fn expect(&mut self, key: &str) -> Result<&'a str, CertError> {
        let (k, v) = self.kv()?;
        if k != key {
            return Err(self.err(format!("expected `{key}`, found `{k}`")));
        }
        Ok(v)
    }

    fn peek_key(&self) -> Option<&'a str> {
        self.peek().and_then(|l| l.split_once(':')).map(|(k, _)| k.trim())
    }

    fn num<T: std::str::FromStr>(&mut self, key: &str) -> Result<T, CertError> {
        let v = self.expect(key)?;
        v.parse().map_err(|_| self.err(format!("invalid number `{v}` for `{key}`")))
    }

    fn floats(&self, v: &str) -> Result<Vec<f64>, CertError> {
        v.split_whitespace().map(|t| t.parse().map_err(|_| self.err(format!("invalid number `{t}`")))).collect()
    }

    fn poly(&self, v: &str, vars: &Variables) -> Result<Polynomial, CertError> {
        parse_polynomial(v, vars).map_err(|e| self.err(e.to_string()))
    }
}

fn parse_scope(l: &Lines, s: &str) -> Result<Scope, CertError> {
    let parts: Vec<&str> = s.split_whitespace().collect();
    let idx = |t: &str| t.parse::<usize>().map_err(|_| l.err(format!("invalid scope `{s}`")));
    match parts.as_slice() {
        ["all"] => Ok(Scope::All),
        ["action", a] => Ok(Scope::Action(idx(a)?)),
        ["region", r] => Ok(Scope::Region(idx(r)?)),
        _ => Err(l.err(format!("invalid scope `{s}`"))),
    }
}

fn parse_functions(l: &mut Lines, vars: &Variables) -> Result<Vec<(Polynomial, Scope)>, CertError> {
    let mut out = Vec::new();
    while let Some(line) = l.peek().filter(|x| x.starts_with("function ")) {
        l.next()?;
        let (head, body) = line.split_once(':').ok_or_else(|| l.err("expected `function <scope>: <poly>`"))?;
        let scope = parse_scope(l, head.trim_start_matches("function").trim())?;
        out.push((l.poly(body.trim(), vars)?, scope));
    }
    if out.is_empty() {
        return Err(l.err("certificate has no functions"));
    }
    Ok(out)
}

fn parse_policy(l: &mut Lines, pomdp: &Pomdp) -> Result<Option<PolicyPartition>, CertError> {
    let vars = full_belief_vars(pomdp.num_states());
    let mut regions = Vec::new();
    while l.peek_key() == Some("policy-region") {
        let v = l.expect("policy-region")?;
        let (a, g) = v.split_once(' ').ok_or_else(|| l.err("expected `policy-region: <action> <guard>`"))?;
        let a = a.parse().map_err(|_| l.err(format!("invalid action `{a}`")))?;
        regions.push((l.poly(g, &vars)?, a));
    }
    if regions.is_empty() {
        return Ok(None);
    }
    let default = l.num("policy-default")?;
    PolicyPartition::new(pomdp, regions, default).map(Some).map_err(|e| l.err(e.to_string()))
}

fn parse_gram(l: &mut Lines) -> Result<Option<GramWitness>, CertError> {
    let head = l.next()?;
    let size = match head.strip_prefix("gram ").map(str::trim) {
        Some("none") => return Ok(None),
        Some(s) => s.parse::<usize>().map_err(|_| l.err(format!("invalid gram size `{s}`")))?,
        None => return Err(l.err(format!("expected `gram`, found `{head}`"))),
    };
    let basis_text = l.expect("basis")?;
    let mut basis = Vec::with_capacity(size);
    for tok in basis_text.split_whitespace() {
        let inner = tok.strip_prefix('[').and_then(|t| t.strip_suffix(']')).ok_or_else(|| l.err(format!("invalid monomial `{tok}`")))?;
        let exps: Result<Vec<u32>, _> =
            if inner.is_empty() { Ok(Vec::new()) } else { inner.split(',').map(|e| e.parse::<u8>().map(u32::from)).collect() };
        basis.push(Monomial::from_exponents(&exps.map_err(|_| l.err(format!("invalid monomial `{tok}`")))?));
    }
    if basis.len() != size {
        return Err(l.err(format!("gram basis has {} monomials, expected {size}", basis.len())));
    }
    let mut matrix = Vec::with_capacity(size);
    for _ in 0..size {
        let r = l.expect("row")?;
        let row = l.floats(r)?;
        if row.len() != size {
            return Err(l.err(format!("gram row has {} entries, expected {size}", row.len())));
        }
        matrix.push(row);
    }
    Ok(Some(GramWitness { basis, matrix }))
}

fn parse_witnesses(l: &mut Lines) -> Result<Vec<PsatzWitness>, CertError> {
    let mut out = Vec::new();
    while let Some(label) = l.peek().and_then(|x| x.strip_prefix("witness ")) {
        l.next()?;
        let names: Vec<&str> = l.expect("vars")?.split_whitespace().collect();
        let vars = variables(&names);
        let t = l.expect("target")?;
        let target = l.poly(t, &vars)?;
        let margin = l.num("margin")?;
        let w = l.expect("weight")?;
        let margin_weight = l.poly(w, &vars)?;
        let mut generators = Vec::new();
        while l.peek_key() == Some("generator") {
            let g = l.expect("generator")?;
            generators.push(l.poly(g, &vars)?);
        }
        let s0 = parse_gram(l)?.ok_or_else(|| l.err("missing s0 gram"))?;
        let mut multipliers = Vec::with_capacity(generators.len());
        for _ in 0..generators.len() {
            multipliers.push(parse_gram(l)?);
        }
        if l.next()? != "end" {
            return Err(l.err("expected `end` after witness"));
        }
        out.push(PsatzWitness { label: label.trim().to_string(), target, margin, margin_weight, generators, s0, multipliers });
    }
    Ok(out)
}

/// Parses a certificate written by [`write_certificate`] for `pomdp`.
/// Evidence lines are skipped; they are recomputed by validation.
pub fn parse_certificate(text: &str, pomdp: &Pomdp) -> Result<Certificate, CertError> {
    let mut l = Lines::new(text);
    if l.next()? != HEADER {
        return Err(l.err("missing certificate header"));
    }
    let kind = l.expect("kind")?;
    let mode = l.expect("mode")?;
    let cert = match kind {
        "reach" => {
            let mode = match mode {
                "single" => ReachMode::Single,
                "per-action" => ReachMode::PerAction,
                "per-partition" => ReachMode::PerPartition,
                m => return Err(l.err(format!("unknown reach mode `{m}`"))),
            };
            let condition = match l.expect("condition")? {
                "invariance" => ReachCondition::Invariance,
                "strict-decrease" => ReachCondition::StrictDecrease,
                c => return Err(l.err(format!("unknown condition `{c}`"))),
            };
            let n = states(&mut l, pomdp)?;
            let degree = l.num("degree")?;
            let level = l.num("level")?;
            let cap = l.num("cap")?;
            let margin = l.num("margin")?;
            let product_degree = l.num("product-degree")?;
            let rounds = l.num("rounds")?;
            let objective = l.num("objective")?;
            let initial = belief(&mut l, n)?;
            let policy = parse_policy(&mut l, pomdp)?;
            let vars = pomdp_core::belief_vars(n);
            let functions = parse_functions(&mut l, &vars)?;
            let mut multipliers = Vec::new();
            while l.peek_key() == Some("multiplier") {
                let m = l.expect("multiplier")?;
                multipliers.push(l.poly(m, &vars)?);
            }
            let witnesses = parse_witnesses(&mut l)?;
            Certificate::Reach(ReachCertificate {
                mode,
                condition,
                degree,
                level,
                cap,
                margin,
                product_degree,
                initial,
                functions,
                multipliers,
                policy,
                witnesses,
                rounds,
                objective,
            })
        }
        "barrier" => {
            let mode = match mode {
                "monolithic" => BarrierMode::Monolithic,
                "per-action-hull" => BarrierMode::PerActionHull,
                "per-partition" => BarrierMode::PerPartition,
                m => return Err(l.err(format!("unknown barrier mode `{m}`"))),
            };
            let n = states(&mut l, pomdp)?;
            let degree = l.num("degree")?;
            let horizon = l.num("horizon")?;
            let margin = l.num("margin")?;
            let product_degree = l.num("product-degree")?;
            let time_degree = l.num("time-degree")?;
            let property = match l.expect("property")? {
                "safety" => {
                    let qs = l.expect("unsafe-states")?;
                    let states = qs
                        .split_whitespace()
                        .map(|t| t.parse().map_err(|_| l.err(format!("invalid state `{t}`"))))
                        .collect::<Result<_, _>>()?;
                    UnsafeSet::Safety { states, lambda: l.num("lambda")? }
                }
                "optimality" => {
                    let gamma = l.num("gamma")?;
                    let t = l.expect("tube")?;
                    let tube = l.poly(t, &variables(&["t"]))?;
                    let mut rewards = Vec::new();
                    while l.peek_key() == Some("reward") {
                        let r = l.expect("reward")?;
                        rewards.push(l.floats(r)?);
                    }
                    UnsafeSet::Optimality { rewards, gamma, tube }
                }
                p => return Err(l.err(format!("unknown property `{p}`"))),
            };
            let initial = if l.peek_key() == Some("initial") {
                InitialSet::Point(belief(&mut l, n)?)
            } else {
                let vars = full_belief_vars(n);
                let mut gs = Vec::new();
                while l.peek_key() == Some("initial-constraint") {
                    let g = l.expect("initial-constraint")?;
                    gs.push(l.poly(g, &vars)?);
                }
                InitialSet::Polytope(gs)
            };
            let policy = parse_policy(&mut l, pomdp)?;
            let vacuous = l
                .expect("vacuous")?
                .split_whitespace()
                .map(|t| match t {
                    "0" => Ok(false),
                    "1" => Ok(true),
                    _ => Err(l.err(format!("invalid vacuity flag `{t}`"))),
                })
                .collect::<Result<_, _>>()?;
            let mut names: Vec<String> = pomdp_core::belief_vars(n).iter().cloned().collect();
            names.push("t".into());
            let functions = parse_functions(&mut l, &variables(&names))?;
            let witnesses = parse_witnesses(&mut l)?;
            Certificate::Barrier(BarrierCertificate {
                mode,
                degree,
                horizon,
                property,
                initial,
                functions,
                policy,
                margin,
                product_degree,
                time_degree,
                vacuous,
                witnesses,
            })
        }
        k => return Err(l.err(format!("unknown certificate kind `{k}`"))),
    };
    while let Some(line) = l.peek() {
        if !line.starts_with("evidence:") {
            l.next()?;
            return Err(l.err(format!("unexpected line `{line}`")));
        }
        l.next()?;
    }
    Ok(cert)
}

fn states(l: &mut Lines, pomdp: &Pomdp) -> Result<usize, CertError> {
    let n: usize = l.num("states")?;
    if n != pomdp.num_states() {
        return Err(l.err(format!("certificate has {n} states, model has {}", pomdp.num_states())));
    }
    Ok(n)
}

fn belief(l: &mut Lines, n: usize) -> Result<Belief, CertError> {
    let v = l.expect("initial")?;
    let b = l.floats(v)?;
    if b.len() != n {
        return Err(l.err(format!("initial belief has {} entries, expected {n}", b.len())));
    }
    Belief::new(b).map_err(|e| l.err(e.to_string()))
}
