use std::fmt::Write as _;

use super::formula::{Cmp, Formula, Lit, Var, VarRole};
use crate::error::{Error, Result};

/// DIMACS CNF with the projection set in a `c p show … 0` comment line.
/// Output is a pure function of the formula.
pub fn write_dimacs(f: &Formula) -> String {
    let mut out = String::new();
    out.push_str("c p show");
    for v in f.projection() {
        write!(out, " {}", v.0 + 1).unwrap();
    }
    out.push_str(" 0\n");
    if let Some(space) = f.space() {
        for (feature, vars) in f.inputs().iter().enumerate() {
            for (v, value) in vars.iter().zip(space.domain(feature)) {
                writeln!(out, "c input {} {}={}", v.0 + 1, space.name(feature), value).unwrap();
            }
        }
    }
    writeln!(out, "p cnf {} {}", f.num_vars(), f.num_clauses()).unwrap();
    for clause in f.all_clauses() {
        for l in clause {
            write!(out, "{} ", l.to_dimacs()).unwrap();
        }
        out.push_str("0\n");
    }
    out
}

fn opb_lit(l: Lit) -> String {
    if l.is_positive() {
        format!("x{}", l.var().0 + 1)
    } else {
        format!("~x{}", l.var().0 + 1)
    }
}

/// OPB: structural clauses as `>= 1` constraints followed by the native PB
/// constraints, all in `>=` form.
pub fn write_opb(f: &Formula) -> String {
    let mut out = String::new();
    writeln!(
        out,
        "* #variable= {} #constraint= {}",
        f.num_vars(),
        f.clauses().len() + f.pb_constraints().len()
    )
    .unwrap();
    for clause in f.clauses() {
        for &l in clause {
            write!(out, "+1 {} ", opb_lit(l)).unwrap();
        }
        out.push_str(">= 1 ;\n");
    }
    for c in f.pb_constraints() {
        // `<=` is written as the negated `>=`.
        let sign = match c.cmp {
            Cmp::Ge => 1,
            Cmp::Le => -1,
        };
        for &(a, l) in &c.terms {
            write!(out, "{:+} {} ", sign * a, opb_lit(l)).unwrap();
        }
        writeln!(out, ">= {} ;", sign * c.bound).unwrap();
    }
    out
}

/// Reads DIMACS CNF. The projection comes from `c p show` (or `c ind`)
/// lines; without one every variable is projected.
pub fn parse_dimacs(text: &str) -> Result<Formula> {
    let mut f = Formula::new();
    let mut projection: Option<Vec<Var>> = None;
    let mut declared: Option<(usize, usize)> = None;
    let mut current: Vec<Lit> = Vec::new();
    let mut clauses = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        if let Some(rest) = line.strip_prefix('c') {
            let rest = rest.trim();
            let list = rest
                .strip_prefix("p show")
                .or_else(|| rest.strip_prefix("ind"));
            if let Some(list) = list {
                let p = projection.get_or_insert_with(Vec::new);
                for tok in list.split_whitespace() {
                    let x: i64 = tok
                        .parse()
                        .map_err(|_| Error::Dimacs(format!("line {}: bad variable `{tok}`", lineno + 1)))?;
                    if x == 0 {
                        break;
                    }
                    if x < 0 {
                        return Err(Error::Dimacs(format!("line {}: negative projection variable", lineno + 1)));
                    }
                    p.push(Var((x - 1) as u32));
                }
            }
            continue;
        }
        if let Some(rest) = line.strip_prefix("p ") {
            let toks: Vec<&str> = rest.split_whitespace().collect();
            if toks.len() != 3 || toks[0] != "cnf" {
                return Err(Error::Dimacs(format!("line {}: bad header", lineno + 1)));
            }
            let nv = toks[1].parse().map_err(|_| Error::Dimacs("bad variable count".into()))?;
            let nc = toks[2].parse().map_err(|_| Error::Dimacs("bad clause count".into()))?;
            declared = Some((nv, nc));
            continue;
        }
        let (nv, _) = declared.ok_or_else(|| Error::Dimacs("clause before header".into()))?;
        for tok in line.split_whitespace() {
            let x: i64 = tok
                .parse()
                .map_err(|_| Error::Dimacs(format!("line {}: bad literal `{tok}`", lineno + 1)))?;
            if x == 0 {
                clauses.push(std::mem::take(&mut current));
            } else {
                if x.unsigned_abs() as usize > nv {
                    return Err(Error::Dimacs(format!("line {}: literal {x} exceeds header", lineno + 1)));
                }
                current.push(Lit::from_dimacs(x));
            }
        }
    }
    let (nv, nc) = declared.ok_or_else(|| Error::Dimacs("missing header".into()))?;
    if !current.is_empty() {
        clauses.push(current);
    }
    if clauses.len() != nc {
        return Err(Error::Dimacs(format!("header declares {nc} clauses, found {}", clauses.len())));
    }
    for _ in 0..nv {
        f.new_var(VarRole::Aux);
    }
    for c in clauses {
        f.add_clause(c);
    }
    let projection = projection.unwrap_or_else(|| (0..nv as u32).map(Var).collect());
    if projection.iter().any(|v| v.index() >= nv) {
        return Err(Error::Dimacs("projection variable exceeds header".into()));
    }
    f.set_projection(projection);
    Ok(f)
}
