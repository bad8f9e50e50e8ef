//! Cassandra-style `.pomdp` text format.
//!
//! Full-matrix `T:` blocks are read column-stochastic (`entry[i][j] = P(i | j)`)
//! unless the file declares `Tcol: false`, in which case rows are start states.
//! Single-entry and row forms always use the `action : start : end` order.

use thiserror::Error;

use crate::{Belief, Pomdp, PomdpError};

#[derive(Debug, Error)]
pub enum FormatError {
    #[error("line {line}: {msg}")]
    Syntax { line: usize, msg: String },
    #[error(transparent)]
    Model(#[from] PomdpError),
}

const KEYWORDS: &[&str] = &["discount", "values", "states", "actions", "observations", "start", "Tcol", "T", "O", "R"];

struct Tokens {
    toks: Vec<(String, usize)>,
    pos: usize,
}

impl Tokens {
    fn new(text: &str) -> Self {
        let mut toks = Vec::new();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("");
            for word in line.replace(':', " : ").split_whitespace() {
                toks.push((word.to_string(), i + 1));
            }
        }
        Tokens { toks, pos: 0 }
    }

    /// Line of the most recently consumed token.
    fn line(&self) -> usize {
        let last = self.pos.saturating_sub(1).min(self.toks.len().saturating_sub(1));
        self.toks.get(last).map_or(0, |t| t.1)
    }

    fn err(&self, msg: impl Into<String>) -> FormatError {
        FormatError::Syntax { line: self.line(), msg: msg.into() }
    }

    fn unexpected(&self) -> FormatError {
        let (tok, line) = self.toks[self.pos].clone();
        FormatError::Syntax { line, msg: format!("unexpected token `{tok}`") }
    }

    fn peek(&self) -> Option<&str> {
        self.toks.get(self.pos).map(|t| t.0.as_str())
    }

    fn next(&mut self) -> Result<String, FormatError> {
        let t = self.toks.get(self.pos).map(|t| t.0.clone()).ok_or_else(|| self.err("unexpected end of file"))?;
        self.pos += 1;
        Ok(t)
    }

    fn expect_colon(&mut self) -> Result<(), FormatError> {
        match self.next()?.as_str() {
            ":" => Ok(()),
            t => Err(self.err(format!("expected `:`, got `{t}`"))),
        }
    }

    fn eat_colon(&mut self) -> bool {
        if self.peek() == Some(":") {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn at_keyword(&self) -> bool {
        self.toks.get(self.pos).is_some_and(|t| KEYWORDS.contains(&t.0.as_str())) && self.toks.get(self.pos + 1).is_some_and(|t| t.0 == ":")
    }

    /// Tokens up to the next stanza keyword.
    fn values(&mut self) -> Vec<String> {
        let mut out = Vec::new();
        while self.peek().is_some() && !self.at_keyword() {
            out.push(self.toks[self.pos].0.clone());
            self.pos += 1;
        }
        out
    }

    fn numbers(&mut self) -> Result<Vec<f64>, FormatError> {
        let line = self.line();
        self.values()
            .iter()
            .map(|v| v.parse::<f64>().map_err(|_| FormatError::Syntax { line, msg: format!("expected a number, got `{v}`") }))
            .collect()
    }
}

fn names_or_count(vals: Vec<String>, prefix: &str, base: usize) -> Vec<String> {
    match vals.as_slice() {
        [one] if one.parse::<usize>().is_ok() => {
            let k: usize = one.parse().unwrap();
            (0..k).map(|i| format!("{prefix}{}", i + base)).collect()
        }
        _ => vals,
    }
}

fn resolve(names: &[String], tok: &str, kind: &'static str) -> Result<Vec<usize>, PomdpError> {
    if tok == "*" {
        return Ok((0..names.len()).collect());
    }
    names
        .iter()
        .position(|n| n == tok)
        .or_else(|| tok.parse::<usize>().ok().filter(|&i| i < names.len()))
        .map(|i| vec![i])
        .ok_or_else(|| PomdpError::UnknownName { kind, name: tok.to_string() })
}

struct Header {
    states: Vec<String>,
    actions: Vec<String>,
    observations: Vec<String>,
}

/// Reads `R: action : start : * : * value` lines; returns `R[q][a]`.
/// Unmentioned pairs are 0. Other stanzas are skipped.
pub fn parse_rewards(pomdp: &Pomdp, text: &str) -> Result<Vec<Vec<f64>>, FormatError> {
    let header = Header { states: pomdp.states.clone(), actions: pomdp.actions.clone(), observations: pomdp.observations.clone() };
    let mut toks = Tokens::new(text);
    let mut r = vec![vec![0.0; header.actions.len()]; header.states.len()];
    while toks.peek().is_some() {
        if !toks.at_keyword() {
            return Err(toks.unexpected());
        }
        let kw = toks.next()?;
        toks.expect_colon()?;
        if kw == "R" {
            reward_stanza(&mut toks, &header, &mut r)?;
        } else {
            toks.values();
        }
    }
    Ok(r)
}

fn reward_stanza(toks: &mut Tokens, h: &Header, r: &mut [Vec<f64>]) -> Result<(), FormatError> {
    let acts = resolve(&h.actions, &toks.next()?, "action")?;
    let mut starts: Vec<usize> = (0..h.states.len()).collect();
    if toks.eat_colon() {
        starts = resolve(&h.states, &toks.next()?, "state")?;
        for kind in ["end state", "observation"] {
            if toks.eat_colon() {
                let t = toks.next()?;
                if t != "*" {
                    return Err(toks.err(format!("rewards depending on the {kind} are not supported")));
                }
            }
        }
    }
    let v = toks.numbers()?;
    let [v] = v.as_slice() else {
        return Err(toks.err("a reward stanza takes exactly one value"));
    };
    for &a in &acts {
        for &q in &starts {
            r[q][a] = *v;
        }
    }
    Ok(())
}

pub fn parse_pomdp(text: &str) -> Result<Pomdp, FormatError> {
    let mut toks = Tokens::new(text);
    let mut h = Header { states: vec![], actions: vec![], observations: vec![] };
    let mut column = true;
    let mut start: Option<Belief> = None;
    let mut t: Vec<Vec<Vec<f64>>> = vec![];
    let mut o: Vec<Vec<Vec<f64>>> = vec![];
    let mut r: Option<Vec<Vec<f64>>> = None;
    let ready = |h: &Header, toks: &Tokens| {
        if h.states.is_empty() || h.actions.is_empty() || h.observations.is_empty() {
            Err(toks.err("states, actions and observations must be declared first"))
        } else {
            Ok(())
        }
    };
    while toks.peek().is_some() {
        if !toks.at_keyword() {
            return Err(toks.unexpected());
        }
        let kw = toks.next()?;
        toks.expect_colon()?;
        match kw.as_str() {
            "discount" | "values" => {
                toks.values();
            }
            "states" => h.states = names_or_count(toks.values(), "q", 1),
            "actions" => h.actions = names_or_count(toks.values(), "a", 0),
            "observations" => h.observations = names_or_count(toks.values(), "z", 1),
            "Tcol" => {
                column = match toks.values().as_slice() {
                    [v] if v == "true" => true,
                    [v] if v == "false" => false,
                    _ => return Err(toks.err("Tcol takes `true` or `false`")),
                }
            }
            "start" => {
                ready(&h, &toks)?;
                let vals = toks.values();
                let n = h.states.len();
                start = Some(match vals.as_slice() {
                    [u] if u == "uniform" => Belief::uniform(n),
                    [s] if s.parse::<f64>().is_err() || n > 1 => Belief::vertex(n, resolve(&h.states, s, "state")?[0]),
                    _ => {
                        let p: Result<Vec<f64>, _> = vals.iter().map(|v| v.parse::<f64>()).collect();
                        let p = p.map_err(|_| toks.err("bad start distribution"))?;
                        if p.len() != n {
                            return Err(toks.err(format!("start has {} entries, expected {n}", p.len())));
                        }
                        Belief::new(p)?
                    }
                });
            }
            "T" => {
                ready(&h, &toks)?;
                let n = h.states.len();
                if t.is_empty() {
                    t = vec![vec![vec![0.0; n]; n]; h.actions.len()];
                }
                let acts = resolve(&h.actions, &toks.next()?, "action")?;
                let mut starts = None;
                let mut ends = None;
                if toks.eat_colon() {
                    starts = Some(resolve(&h.states, &toks.next()?, "state")?);
                    if toks.eat_colon() {
                        ends = Some(resolve(&h.states, &toks.next()?, "state")?);
                    }
                }
                let vals = toks.values();
                let matrix = dense(&vals, starts.is_none(), ends.is_none(), n, n, &toks)?;
                for &a in &acts {
                    for s in starts.clone().unwrap_or_else(|| (0..n).collect()) {
                        for e in ends.clone().unwrap_or_else(|| (0..n).collect()) {
                            // Row-major value as written: (start, end) unless a
                            // full matrix is given in column orientation.
                            let (rr, cc) = match (&starts, &ends) {
                                (None, _) if column => (e, s),
                                _ => (s, e),
                            };
                            let rr = if starts.is_some() { 0 } else { rr };
                            let cc = if ends.is_some() { 0 } else { cc };
                            t[a][e][s] = matrix[rr][cc];
                        }
                    }
                }
            }
            "O" => {
                ready(&h, &toks)?;
                let (n, nz) = (h.states.len(), h.observations.len());
                if o.is_empty() {
                    o = vec![vec![vec![0.0; nz]; n]; h.actions.len()];
                }
                let acts = resolve(&h.actions, &toks.next()?, "action")?;
                let mut ends = None;
                let mut obs = None;
                if toks.eat_colon() {
                    ends = Some(resolve(&h.states, &toks.next()?, "state")?);
                    if toks.eat_colon() {
                        obs = Some(resolve(&h.observations, &toks.next()?, "observation")?);
                    }
                }
                let vals = toks.values();
                let matrix = dense(&vals, ends.is_none(), obs.is_none(), n, nz, &toks)?;
                for &a in &acts {
                    for e in ends.clone().unwrap_or_else(|| (0..n).collect()) {
                        for z in obs.clone().unwrap_or_else(|| (0..nz).collect()) {
                            let rr = if ends.is_some() { 0 } else { e };
                            let cc = if obs.is_some() { 0 } else { z };
                            o[a][e][z] = matrix[rr][cc];
                        }
                    }
                }
            }
            "R" => {
                ready(&h, &toks)?;
                let r = r.get_or_insert_with(|| vec![vec![0.0; h.actions.len()]; h.states.len()]);
                reward_stanza(&mut toks, &h, r)?;
            }
            _ => unreachable!("keyword list"),
        }
    }
    ready(&h, &toks)?;
    let n = h.states.len();
    if t.is_empty() {
        return Err(toks.err("no transition stanzas"));
    }
    if o.is_empty() {
        return Err(toks.err("no observation stanzas"));
    }
    let start = start.unwrap_or_else(|| Belief::uniform(n));
    let pomdp = Pomdp::new(h.states, h.actions, h.observations, t, o, start)?;
    Ok(match r {
        Some(r) => pomdp.with_rewards(r)?,
        None => pomdp,
    })
}

/// Values of one stanza as a `rows x cols` block, where a dimension fixed by
/// the stanza header collapses to 1. Accepts `uniform` and, for square
/// blocks, `identity`.
fn dense(
    vals: &[String],
    free_rows: bool,
    free_cols: bool,
    n_rows: usize,
    n_cols: usize,
    toks: &Tokens,
) -> Result<Vec<Vec<f64>>, FormatError> {
    let rows = if free_rows { n_rows } else { 1 };
    let cols = if free_cols { n_cols } else { 1 };
    match vals {
        [w] if w == "uniform" => return Ok(vec![vec![1.0 / n_cols as f64; cols]; rows]),
        [w] if w == "identity" && free_rows && free_cols && n_rows == n_cols => {
            return Ok((0..rows).map(|i| (0..cols).map(|j| f64::from(u8::from(i == j))).collect()).collect());
        }
        _ => {}
    }
    let nums: Result<Vec<f64>, _> = vals.iter().map(|v| v.parse::<f64>()).collect();
    let nums = nums.map_err(|_| toks.err("expected numbers, `uniform` or `identity`"))?;
    if nums.len() != rows * cols {
        return Err(toks.err(format!("expected {} values, got {}", rows * cols, nums.len())));
    }
    Ok(nums.chunks(cols).map(<[f64]>::to_vec).collect())
}

fn join(v: impl IntoIterator<Item = f64>) -> String {
    v.into_iter().map(|x| x.to_string()).collect::<Vec<_>>().join(" ")
}

/// Serializes in the column-stochastic dialect read by [`parse_pomdp`].
pub fn write_pomdp(p: &Pomdp) -> String {
    let n = p.num_states();
    let mut s = String::new();
    s.push_str(&format!("states: {}\n", p.states.join(" ")));
    s.push_str(&format!("actions: {}\n", p.actions.join(" ")));
    s.push_str(&format!("observations: {}\n", p.observations.join(" ")));
    s.push_str("Tcol: true\n");
    s.push_str(&format!("start: {}\n", join(p.initial_belief().iter().copied())));
    for a in 0..p.num_actions() {
        s.push_str(&format!("\nT: {}\n", p.actions[a]));
        for i in 0..n {
            s.push_str(&join((0..n).map(|j| p.t(a, i, j))));
            s.push('\n');
        }
    }
    for a in 0..p.num_actions() {
        s.push_str(&format!("\nO: {}\n", p.actions[a]));
        for q in 0..n {
            s.push_str(&join(p.observation_table(a)[q].iter().copied()));
            s.push('\n');
        }
    }
    if let Some(r) = p.rewards() {
        s.push('\n');
        for (q, row) in r.iter().enumerate() {
            for (a, v) in row.iter().enumerate() {
                s.push_str(&format!("R: {} : {} : * : * {v}\n", p.actions[a], p.states[q]));
            }
        }
    }
    s
}
