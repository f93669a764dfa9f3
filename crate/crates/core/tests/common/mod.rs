//! Shared test helpers: a dense two-phase tableau simplex with Bland's rule,
//! independent of the library's solver, and random LP generation.
#![allow(dead_code)]

pub mod gates;

use rand::Rng;
use recovery_core::lp::{LinearProgram, Relation};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum OracleStatus {
    Optimal,
    Infeasible,
    Unbounded,
}

#[derive(Clone, Debug)]
pub struct OracleLp {
    pub status: OracleStatus,
    pub objective: f64,
    pub x: Vec<f64>,
}

const EPS: f64 = 1e-9;

/// How an original variable maps onto nonnegative tableau columns.
enum Map {
    /// x = l + c
    Shift(f64, usize),
    /// x = u - c
    Flip(f64, usize),
    /// x = c1 - c2
    Split(usize, usize),
}

/// Constraint over tableau columns: (coefficients, relation, rhs).
type Row = (Vec<(usize, f64)>, Relation, f64);

pub fn tableau_solve(lp: &LinearProgram) -> OracleLp {
    let n = lp.num_vars();
    let mut maps = Vec::with_capacity(n);
    let mut ncol = 0;
    let mut rows: Vec<Row> = Vec::new();
    let mut cost: Vec<f64> = Vec::new();
    let mut const_obj = 0.0;
    for v in lp.vars() {
        if v.lower.is_finite() {
            maps.push(Map::Shift(v.lower, ncol));
            cost.push(v.cost);
            const_obj += v.cost * v.lower;
            if v.upper.is_finite() {
                rows.push((vec![(ncol, 1.0)], Relation::Le, v.upper - v.lower));
            }
            ncol += 1;
        } else if v.upper.is_finite() {
            maps.push(Map::Flip(v.upper, ncol));
            cost.push(-v.cost);
            const_obj += v.cost * v.upper;
            ncol += 1;
        } else {
            maps.push(Map::Split(ncol, ncol + 1));
            cost.push(v.cost);
            cost.push(-v.cost);
            ncol += 2;
        }
    }
    for r in lp.rows() {
        let mut coefs = Vec::new();
        let mut rhs = r.rhs;
        for &(j, a) in &r.coeffs {
            match maps[j] {
                Map::Shift(l, c) => {
                    rhs -= a * l;
                    coefs.push((c, a));
                }
                Map::Flip(u, c) => {
                    rhs -= a * u;
                    coefs.push((c, -a));
                }
                Map::Split(c1, c2) => {
                    coefs.push((c1, a));
                    coefs.push((c2, -a));
                }
            }
        }
        rows.push((coefs, r.relation, rhs));
    }
    let (status, obj, y) = dense_simplex(ncol, &cost, &rows);
    let x = y.map(|y| {
        maps.iter()
            .map(|m| match *m {
                Map::Shift(l, c) => l + y[c],
                Map::Flip(u, c) => u - y[c],
                Map::Split(c1, c2) => y[c1] - y[c2],
            })
            .collect()
    });
    OracleLp { status, objective: obj + const_obj, x: x.unwrap_or_default() }
}

/// min c'y, rows over y >= 0.
fn dense_simplex(ncol: usize, cost: &[f64], rows: &[Row]) -> (OracleStatus, f64, Option<Vec<f64>>) {
    let m = rows.len();
    // columns: originals, one slack/surplus per inequality, one artificial per row
    let n_slack = rows.iter().filter(|r| r.1 != Relation::Eq).count();
    let total = ncol + n_slack + m;
    let art0 = ncol + n_slack;
    let mut t = vec![vec![0.0; total + 1]; m];
    let mut basis = vec![0usize; m];
    let mut s = ncol;
    for (i, (coefs, rel, rhs)) in rows.iter().enumerate() {
        let sign = if *rhs < 0.0 { -1.0 } else { 1.0 };
        for &(j, a) in coefs {
            t[i][j] += sign * a;
        }
        match rel {
            Relation::Le => {
                t[i][s] = sign;
                s += 1;
            }
            Relation::Ge => {
                t[i][s] = -sign;
                s += 1;
            }
            Relation::Eq => {}
        }
        t[i][art0 + i] = 1.0;
        t[i][total] = sign * rhs;
        basis[i] = art0 + i;
    }
    // phase one
    let mut c1 = vec![0.0; total];
    for c in c1.iter_mut().skip(art0) {
        *c = 1.0;
    }
    if !run(&mut t, &mut basis, &c1, total) {
        unreachable!("phase one is bounded");
    }
    let infeas: f64 = (0..m).filter(|&i| basis[i] >= art0).map(|i| t[i][total]).sum();
    if infeas > 1e-7 {
        return (OracleStatus::Infeasible, f64::NAN, None);
    }
    // drive zero artificials out, dropping redundant rows
    let mut keep = vec![true; m];
    for i in 0..m {
        if basis[i] >= art0 {
            match (0..art0).find(|&j| t[i][j].abs() > 1e-9) {
                Some(j) => pivot(&mut t, &mut basis, i, j),
                None => keep[i] = false,
            }
        }
    }
    let mut t2: Vec<Vec<f64>> = Vec::new();
    let mut b2 = Vec::new();
    for i in 0..m {
        if keep[i] {
            let mut row: Vec<f64> = t[i][..art0].to_vec();
            row.push(t[i][total]);
            t2.push(row);
            b2.push(basis[i]);
        }
    }
    let mut c2 = vec![0.0; art0];
    c2[..ncol].copy_from_slice(cost);
    if !run(&mut t2, &mut b2, &c2, art0) {
        return (OracleStatus::Unbounded, f64::NEG_INFINITY, None);
    }
    let mut y = vec![0.0; ncol];
    for (i, &b) in b2.iter().enumerate() {
        if b < ncol {
            y[b] = t2[i][art0];
        }
    }
    let obj = cost.iter().zip(&y).map(|(c, v)| c * v).sum();
    (OracleStatus::Optimal, obj, Some(y))
}

fn pivot(t: &mut [Vec<f64>], basis: &mut [usize], r: usize, c: usize) {
    let p = t[r][c];
    for v in t[r].iter_mut() {
        *v /= p;
    }
    let pr = t[r].clone();
    for (i, row) in t.iter_mut().enumerate() {
        if i != r {
            let f = row[c];
            if f != 0.0 {
                for (v, w) in row.iter_mut().zip(&pr) {
                    *v -= f * w;
                }
            }
        }
    }
    basis[r] = c;
}

/// Bland's rule; `false` when unbounded. `n` columns, rhs at index `n`.
fn run(t: &mut [Vec<f64>], basis: &mut [usize], c: &[f64], n: usize) -> bool {
    loop {
        let mut enter = None;
        for j in 0..n {
            if basis.contains(&j) {
                continue;
            }
            let d = c[j] - basis.iter().enumerate().map(|(i, &b)| c[b] * t[i][j]).sum::<f64>();
            if d < -EPS {
                enter = Some(j);
                break;
            }
        }
        let Some(j) = enter else { return true };
        let mut leave: Option<(usize, f64)> = None;
        for i in 0..t.len() {
            if t[i][j] > EPS {
                let ratio = t[i][n] / t[i][j];
                match leave {
                    None => leave = Some((i, ratio)),
                    Some((li, lr)) => {
                        if ratio < lr - EPS || (ratio <= lr + EPS && basis[i] < basis[li]) {
                            leave = Some((i, ratio));
                        }
                    }
                }
            }
        }
        let Some((i, _)) = leave else { return false };
        pivot(t, basis, i, j);
    }
}

/// Small random LP with integer data: mixed relations, some free and some
/// boxed variables.
pub fn random_lp(rng: &mut impl Rng, max_rows: usize, max_vars: usize) -> LinearProgram {
    let mut lp = LinearProgram::new();
    let n = rng.gen_range(1..=max_vars);
    let m = rng.gen_range(1..=max_rows);
    for j in 0..n {
        let cost = rng.gen_range(-5..=5) as f64;
        let (lo, hi) = match rng.gen_range(0..6) {
            0 => (f64::NEG_INFINITY, f64::INFINITY),
            1 => (0.0, f64::INFINITY),
            2 => (rng.gen_range(-3..=0) as f64, rng.gen_range(1..=4) as f64),
            3 => (f64::NEG_INFINITY, rng.gen_range(0..=3) as f64),
            _ => (0.0, rng.gen_range(1..=5) as f64),
        };
        lp.add_var(format!("x{j}"), cost, lo, hi);
    }
    for i in 0..m {
        let mut coefs: Vec<(usize, f64)> = Vec::new();
        for j in 0..n {
            if rng.gen_bool(0.7) {
                let v = rng.gen_range(-4..=4) as f64;
                if v != 0.0 {
                    coefs.push((j, v));
                }
            }
        }
        let rel = match rng.gen_range(0..3) {
            0 => Relation::Le,
            1 => Relation::Ge,
            _ => Relation::Eq,
        };
        lp.add_row(format!("r{i}"), coefs, rel, rng.gen_range(-6..=8) as f64);
    }
    lp
}

/// Outcome category of one LP comparison.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum LpCase {
    Optimal,
    Infeasible,
    Unbounded,
}

/// Solves `lp` with the library and the tableau oracle and checks status,
/// objective, primal feasibility, dual signs, reduced costs,
/// complementary slackness, strong duality and any Farkas ray.
pub fn check_lp(lp: &LinearProgram) -> Result<LpCase, String> {
    use recovery_core::lp::{solve_lp, verify_farkas, LpStatus};
    let tol = 1e-6;
    let ours = solve_lp(lp).map_err(|e| format!("solver error: {e}"))?;
    let oracle = tableau_solve(lp);
    match (ours.status, oracle.status) {
        (LpStatus::Infeasible, OracleStatus::Infeasible) => {
            let ray = ours.farkas_ray.as_ref().ok_or("infeasible without a ray")?;
            if !verify_farkas(lp, ray, 1e-7) {
                return Err("Farkas ray fails verification".into());
            }
            return Ok(LpCase::Infeasible);
        }
        (LpStatus::Unbounded, OracleStatus::Unbounded) => return Ok(LpCase::Unbounded),
        (LpStatus::Optimal, OracleStatus::Optimal) => {}
        (a, b) => return Err(format!("status mismatch: solver {a:?}, oracle {b:?}")),
    }
    let scale = 1.0f64.max(oracle.objective.abs());
    if (ours.objective - oracle.objective).abs() > tol * scale {
        return Err(format!("objective {} vs oracle {}", ours.objective, oracle.objective));
    }
    if lp.max_violation(&ours.x) > tol {
        return Err(format!("primal violation {}", lp.max_violation(&ours.x)));
    }
    let mut d: Vec<f64> = lp.vars().iter().map(|v| v.cost).collect();
    let mut dual_obj = 0.0;
    for (i, row) in lp.rows().iter().enumerate() {
        let y = ours.duals[i];
        let sign_ok = match row.relation {
            Relation::Le => y <= tol,
            Relation::Ge => y >= -tol,
            Relation::Eq => true,
        };
        if !sign_ok {
            return Err(format!("dual {y} has the wrong sign on row {i}"));
        }
        let slack = lp.row_activity(i, &ours.x) - row.rhs;
        if y.abs() > tol && slack.abs() > tol {
            return Err(format!("row {i}: dual {y} on slack {slack}"));
        }
        dual_obj += y * row.rhs;
        for &(j, a) in &row.coeffs {
            d[j] -= y * a;
        }
    }
    for (j, v) in lp.vars().iter().enumerate() {
        if (d[j] - ours.reduced_costs[j]).abs() > tol {
            return Err(format!("reduced cost {j}: {} vs c - A'y = {}", ours.reduced_costs[j], d[j]));
        }
        let x = ours.x[j];
        let at_lo = (x - v.lower).abs() <= tol;
        let at_hi = (x - v.upper).abs() <= tol;
        if d[j] > tol && !at_lo {
            return Err(format!("var {j}: positive reduced cost {} off its lower bound", d[j]));
        }
        if d[j] < -tol && !at_hi {
            return Err(format!("var {j}: negative reduced cost {} off its upper bound", d[j]));
        }
        if d[j] > tol {
            dual_obj += d[j] * v.lower;
        } else if d[j] < -tol {
            dual_obj += d[j] * v.upper;
        }
    }
    if (dual_obj - ours.objective).abs() > tol * scale {
        return Err(format!("dual objective {dual_obj} vs primal {}", ours.objective));
    }
    Ok(LpCase::Optimal)
}
