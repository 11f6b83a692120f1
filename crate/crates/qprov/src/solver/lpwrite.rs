//! Emission of programs in the standard LP text format, for cross-checking
//! models against external solvers. Diagnostic only; nothing reads it back.

use std::fmt::Write;

use super::{LinearProgram, VarKind};

fn sanitize(name: &str) -> String {
    name.chars()
        .map(|c| {
            if c.is_ascii_alphanumeric() || c == '_' {
                c
            } else {
                '_'
            }
        })
        .collect()
}

fn term_list(out: &mut String, terms: impl Iterator<Item = (usize, f64)>, names: &[String]) {
    let mut first = true;
    for (v, c) in terms {
        if c == 0.0 {
            continue;
        }
        if first {
            if c < 0.0 {
                let _ = write!(out, "- ");
            }
            first = false;
        } else if c < 0.0 {
            let _ = write!(out, " - ");
        } else {
            let _ = write!(out, " + ");
        }
        let mag = c.abs();
        if mag == 1.0 {
            let _ = write!(out, "{}", names[v]);
        } else {
            let _ = write!(out, "{} {}", mag, names[v]);
        }
    }
    if first {
        let _ = write!(out, "0");
    }
}

/// Renders `program` in CPLEX LP format.
pub fn write_lp_format(program: &LinearProgram) -> String {
    let names: Vec<String> = program.vars.iter().map(|v| sanitize(&v.name)).collect();
    let mut out = String::new();
    out.push_str("Minimize\n obj: ");
    term_list(
        &mut out,
        program.objective.iter().enumerate().map(|(v, &c)| (v, c)),
        &names,
    );
    out.push_str("\nSubject To\n");
    for (i, c) in program.cons.iter().enumerate() {
        let _ = write!(out, " {}: ", sanitize(&c.name));
        term_list(&mut out, c.terms.iter().copied(), &names);
        let _ = writeln!(out, " {} {}", c.sense, c.rhs);
        let _ = i;
    }
    out.push_str("Bounds\n");
    for (v, var) in program.vars.iter().enumerate() {
        let lo = var.lower;
        let hi = var.upper;
        if lo == f64::NEG_INFINITY && hi == f64::INFINITY {
            let _ = writeln!(out, " {} free", names[v]);
        } else if lo == f64::NEG_INFINITY {
            let _ = writeln!(out, " -inf <= {} <= {}", names[v], hi);
        } else if hi == f64::INFINITY {
            let _ = writeln!(out, " {} >= {}", names[v], lo);
        } else {
            let _ = writeln!(out, " {} <= {} <= {}", lo, names[v], hi);
        }
    }
    let generals: Vec<&str> = program
        .vars
        .iter()
        .enumerate()
        .filter(|(_, v)| v.kind == VarKind::Integer)
        .map(|(j, _)| names[j].as_str())
        .collect();
    if !generals.is_empty() {
        out.push_str("Generals\n");
        for g in generals {
            let _ = writeln!(out, " {g}");
        }
    }
    let binaries: Vec<&str> = program
        .vars
        .iter()
        .enumerate()
        .filter(|(_, v)| v.kind == VarKind::Binary)
        .map(|(j, _)| names[j].as_str())
        .collect();
    if !binaries.is_empty() {
        out.push_str("Binaries\n");
        for b in binaries {
            let _ = writeln!(out, " {b}");
        }
    }
    out.push_str("End\n");
    out
}
