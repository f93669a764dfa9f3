use std::fmt::Write;

use super::{LinearProgram, Relation};

/// Renders `lp` in CPLEX LP text format. `integer_vars` go into a
/// `Binaries` section when their bounds are `[0, 1]`, otherwise `General`.
pub fn write_lp_format(lp: &LinearProgram, integer_vars: &[usize]) -> String {
    let names: Vec<String> = (0..lp.num_vars()).map(|j| var_name(lp, j)).collect();
    let mut out = String::new();
    out.push_str("Minimize\n obj:");
    let mut any = false;
    for (j, v) in lp.vars().iter().enumerate() {
        if v.cost != 0.0 {
            push_term(&mut out, v.cost, &names[j]);
            any = true;
        }
    }
    if !any {
        out.push_str(" 0");
    }
    out.push_str("\nSubject To\n");
    for (i, row) in lp.rows().iter().enumerate() {
        let _ = write!(out, " {}:", row_name(&row.name, i));
        if row.coeffs.is_empty() {
            out.push_str(" 0");
        }
        for &(j, v) in &row.coeffs {
            push_term(&mut out, v, &names[j]);
        }
        let op = match row.relation {
            Relation::Le => "<=",
            Relation::Ge => ">=",
            Relation::Eq => "=",
        };
        let _ = writeln!(out, " {op} {}", fmt_num(row.rhs));
    }
    out.push_str("Bounds\n");
    for (j, v) in lp.vars().iter().enumerate() {
        let lo = if v.lower.is_finite() { fmt_num(v.lower) } else { "-inf".into() };
        let hi = if v.upper.is_finite() { fmt_num(v.upper) } else { "+inf".into() };
        let _ = writeln!(out, " {lo} <= {} <= {hi}", names[j]);
    }
    let (bins, gens): (Vec<usize>, Vec<usize>) = integer_vars.iter().partition(|&&j| {
        let v = &lp.vars()[j];
        v.lower == 0.0 && v.upper == 1.0
    });
    if !bins.is_empty() {
        out.push_str("Binaries\n");
        for j in bins {
            let _ = writeln!(out, " {}", names[j]);
        }
    }
    if !gens.is_empty() {
        out.push_str("General\n");
        for j in gens {
            let _ = writeln!(out, " {}", names[j]);
        }
    }
    out.push_str("End\n");
    out
}

fn push_term(out: &mut String, coef: f64, name: &str) {
    if coef < 0.0 {
        let _ = write!(out, " - {} {name}", fmt_num(-coef));
    } else {
        let _ = write!(out, " + {} {name}", fmt_num(coef));
    }
}

fn fmt_num(v: f64) -> String {
    format!("{v}")
}

fn sanitize(s: &str) -> String {
    s.chars().map(|c| if c.is_ascii_alphanumeric() || "_.[]".contains(c) { c } else { '_' }).collect()
}

fn var_name(lp: &LinearProgram, j: usize) -> String {
    let raw = &lp.vars()[j].name;
    if raw.is_empty() {
        format!("x{j}")
    } else {
        format!("{}#{j}", sanitize(raw)).replace('#', "_")
    }
}

fn row_name(raw: &str, i: usize) -> String {
    if raw.is_empty() {
        format!("r{i}")
    } else {
        format!("{}_{i}", sanitize(raw))
    }
}
