use std::collections::HashMap;
use std::fmt::Write as _;
use std::io::{BufRead, Write};
use std::path::Path;

use crate::{LinearProgram, LpError, Relation, VarKind};

fn row_name(i: usize) -> String {
    format!("R{i:07}")
}

fn col_name(j: usize) -> String {
    format!("C{j:07}")
}

/// Writes `lp` as fixed-format MPS. Names are generated (`C0000001`,
/// `R0000001`); numbers are written in shortest round-trip form.
pub fn write_mps<W: Write>(lp: &LinearProgram, mut out: W) -> Result<(), LpError> {
    lp.validate()?;
    let mut s = String::new();
    writeln!(s, "NAME          POMDPCERT").unwrap();
    writeln!(s, "ROWS").unwrap();
    writeln!(s, " N  COST").unwrap();
    for (i, c) in lp.constraints().iter().enumerate() {
        let t = match c.relation {
            Relation::Le => "L",
            Relation::Ge => "G",
            Relation::Eq => "E",
        };
        writeln!(s, " {:<2} {}", t, row_name(i)).unwrap();
    }
    let mut by_col: Vec<Vec<(String, f64)>> = vec![Vec::new(); lp.num_vars()];
    if let Some(obj) = lp.objective() {
        for &(j, a) in obj {
            by_col[j].push(("COST".into(), a));
        }
    }
    for (i, c) in lp.constraints().iter().enumerate() {
        for &(j, a) in &c.coeffs {
            by_col[j].push((row_name(i), a));
        }
    }
    writeln!(s, "COLUMNS").unwrap();
    for (j, entries) in by_col.iter().enumerate() {
        if entries.is_empty() {
            writeln!(s, "    {:<8}  {:<8}  {:>12}", col_name(j), "COST", 0.0f64).unwrap();
        }
        for (r, a) in entries {
            writeln!(s, "    {:<8}  {:<8}  {:>12}", col_name(j), r, a).unwrap();
        }
    }
    writeln!(s, "RHS").unwrap();
    for (i, c) in lp.constraints().iter().enumerate() {
        if c.rhs != 0.0 {
            writeln!(s, "    {:<8}  {:<8}  {:>12}", "RHS", row_name(i), c.rhs).unwrap();
        }
    }
    writeln!(s, "BOUNDS").unwrap();
    for j in 0..lp.num_vars() {
        if lp.var_kind(j) == VarKind::Free {
            writeln!(s, " FR {:<8}  {}", "BND", col_name(j)).unwrap();
        }
    }
    writeln!(s, "ENDATA").unwrap();
    out.write_all(s.as_bytes())?;
    Ok(())
}

pub fn export_mps(lp: &LinearProgram, path: impl AsRef<Path>) -> Result<(), LpError> {
    let f = std::fs::File::create(path)?;
    let mut w = std::io::BufWriter::new(f);
    write_mps(lp, &mut w)?;
    w.flush()?;
    Ok(())
}

pub fn import_mps(path: impl AsRef<Path>) -> Result<LinearProgram, LpError> {
    let f = std::fs::File::open(path)?;
    read_mps(std::io::BufReader::new(f))
}

#[derive(PartialEq)]
enum Section {
    None,
    Rows,
    Columns,
    Rhs,
    Bounds,
}

/// Reads MPS produced by [`write_mps`] (or any MPS using N/L/G/E rows, FR/PL
/// bounds and no RANGES). Fields are split on whitespace.
pub fn read_mps<R: BufRead>(input: R) -> Result<LinearProgram, LpError> {
    let mut section = Section::None;
    let mut obj_row: Option<String> = None;
    let mut rows: Vec<(String, Relation)> = Vec::new();
    let mut row_index: HashMap<String, usize> = HashMap::new();
    let mut cols: Vec<String> = Vec::new();
    let mut col_index: HashMap<String, usize> = HashMap::new();
    let mut entries: Vec<Vec<(usize, f64)>> = Vec::new();
    let mut objective: Vec<(usize, f64)> = Vec::new();
    let mut rhs: Vec<f64> = Vec::new();
    let mut free: Vec<bool> = Vec::new();
    let err = |line: usize, msg: &str| LpError::Parse { line, msg: msg.to_string() };
    let num = |line: usize, t: &str| t.parse::<f64>().map_err(|_| err(line, &format!("bad number `{t}`")));

    for (k, line) in input.lines().enumerate() {
        let ln = k + 1;
        let line = line?;
        if line.trim().is_empty() || line.starts_with('*') {
            continue;
        }
        let toks: Vec<&str> = line.split_whitespace().collect();
        if !line.starts_with(' ') && !line.starts_with('\t') {
            section = match toks[0] {
                "NAME" => Section::None,
                "ROWS" => Section::Rows,
                "COLUMNS" => Section::Columns,
                "RHS" => Section::Rhs,
                "BOUNDS" => Section::Bounds,
                "ENDATA" => break,
                other => return Err(err(ln, &format!("unsupported section `{other}`"))),
            };
            continue;
        }
        match section {
            Section::Rows => {
                if toks.len() != 2 {
                    return Err(err(ln, "row line needs type and name"));
                }
                let rel = match toks[0] {
                    "N" => {
                        if obj_row.is_none() {
                            obj_row = Some(toks[1].to_string());
                        }
                        continue;
                    }
                    "L" => Relation::Le,
                    "G" => Relation::Ge,
                    "E" => Relation::Eq,
                    other => return Err(err(ln, &format!("unknown row type `{other}`"))),
                };
                row_index.insert(toks[1].to_string(), rows.len());
                rows.push((toks[1].to_string(), rel));
                entries.push(Vec::new());
                rhs.push(0.0);
            }
            Section::Columns => {
                if toks.len() < 3 || toks.len().is_multiple_of(2) {
                    return Err(err(ln, "column line needs name and row/value pairs"));
                }
                let j = *col_index.entry(toks[0].to_string()).or_insert_with(|| {
                    cols.push(toks[0].to_string());
                    free.push(false);
                    cols.len() - 1
                });
                for pair in toks[1..].chunks(2) {
                    let v = num(ln, pair[1])?;
                    if Some(pair[0]) == obj_row.as_deref() {
                        objective.push((j, v));
                    } else {
                        let i = *row_index.get(pair[0]).ok_or_else(|| err(ln, "unknown row"))?;
                        entries[i].push((j, v));
                    }
                }
            }
            Section::Rhs => {
                let pairs = if toks.len() % 2 == 1 { &toks[1..] } else { &toks[..] };
                for pair in pairs.chunks(2) {
                    let v = num(ln, pair[1])?;
                    if Some(pair[0]) == obj_row.as_deref() {
                        continue;
                    }
                    let i = *row_index.get(pair[0]).ok_or_else(|| err(ln, "unknown row"))?;
                    rhs[i] = v;
                }
            }
            Section::Bounds => {
                if toks.len() < 3 {
                    return Err(err(ln, "bound line too short"));
                }
                let j = *col_index.get(toks[2]).ok_or_else(|| err(ln, "unknown column"))?;
                match toks[0] {
                    "FR" => free[j] = true,
                    "PL" => {}
                    "LO" if toks.len() == 4 && num(ln, toks[3])? == 0.0 => {}
                    other => return Err(err(ln, &format!("unsupported bound `{other}`"))),
                }
            }
            Section::None => return Err(err(ln, "data outside a section")),
        }
    }

    let mut lp = LinearProgram::new();
    for (name, &f) in cols.iter().zip(&free) {
        lp.add_var(name.clone(), if f { VarKind::Free } else { VarKind::NonNegative });
    }
    for (i, (name, rel)) in rows.iter().enumerate() {
        lp.add_constraint(name.clone(), entries[i].iter().copied(), *rel, rhs[i]);
    }
    if objective.iter().any(|&(_, v)| v != 0.0) {
        lp.set_objective(objective);
    }
    Ok(lp)
}
