//! Linear programming and small 0-1 branch-and-bound.
//!
//! The solver is a dense bounded-variable revised simplex with an explicit
//! basis inverse. Phase one uses one artificial per row, and its duals are
//! returned as a Farkas certificate when the program is infeasible. Every
//! LP relaxation in the crate (restricted master, restricted gate
//! subproblems and their phase-one programs) goes through [`solve_lp`].

mod lp_format;
mod mip;
mod simplex;

pub use lp_format::write_lp_format;
pub use mip::{solve_mip, MipOptions, MipSolution, MipStatus};
pub use simplex::solve_lp;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Primal feasibility tolerance.
pub const TOL_FEAS: f64 = 1e-7;
/// Reduced-cost (dual feasibility) tolerance.
pub const TOL_DUAL: f64 = 1e-7;
/// Integrality tolerance for branch-and-bound.
pub const TOL_INT: f64 = 1e-6;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LpError {
    #[error("numerical failure: {0}")]
    Numerical(String),
    #[error("malformed program: {0}")]
    Malformed(String),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Relation {
    Le,
    Ge,
    Eq,
}

#[derive(Clone, Debug)]
pub struct Variable {
    pub name: String,
    pub cost: f64,
    pub lower: f64,
    pub upper: f64,
}

#[derive(Clone, Debug)]
pub struct Row {
    pub name: String,
    pub coeffs: Vec<(usize, f64)>,
    pub relation: Relation,
    pub rhs: f64,
}

/// A minimization problem `min c'x` over rows `a_i x (<=|>=|=) b_i` and
/// per-variable bounds. Lower bounds may be `-inf`, upper bounds `+inf`.
#[derive(Clone, Debug, Default)]
pub struct LinearProgram {
    vars: Vec<Variable>,
    rows: Vec<Row>,
}

impl LinearProgram {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add_var(&mut self, name: impl Into<String>, cost: f64, lower: f64, upper: f64) -> usize {
        self.vars.push(Variable { name: name.into(), cost, lower, upper });
        self.vars.len() - 1
    }

    /// Adds a row. Duplicate variable entries are merged.
    pub fn add_row(
        &mut self,
        name: impl Into<String>,
        coeffs: impl IntoIterator<Item = (usize, f64)>,
        relation: Relation,
        rhs: f64,
    ) -> usize {
        let mut merged: Vec<(usize, f64)> = Vec::new();
        let mut entries: Vec<(usize, f64)> = coeffs.into_iter().collect();
        entries.sort_by_key(|e| e.0);
        for (j, v) in entries {
            match merged.last_mut() {
                Some(last) if last.0 == j => last.1 += v,
                _ => merged.push((j, v)),
            }
        }
        merged.retain(|&(_, v)| v != 0.0);
        self.rows.push(Row { name: name.into(), coeffs: merged, relation, rhs });
        self.rows.len() - 1
    }

    pub fn num_vars(&self) -> usize {
        self.vars.len()
    }

    pub fn num_rows(&self) -> usize {
        self.rows.len()
    }

    pub fn vars(&self) -> &[Variable] {
        &self.vars
    }

    pub fn rows(&self) -> &[Row] {
        &self.rows
    }

    pub fn set_bounds(&mut self, var: usize, lower: f64, upper: f64) {
        self.vars[var].lower = lower;
        self.vars[var].upper = upper;
    }

    pub fn set_cost(&mut self, var: usize, cost: f64) {
        self.vars[var].cost = cost;
    }

    /// Adds `value` to the coefficient of `var` in `row`.
    pub fn add_coef(&mut self, row: usize, var: usize, value: f64) {
        let coeffs = &mut self.rows[row].coeffs;
        match coeffs.binary_search_by_key(&var, |e| e.0) {
            Ok(i) => coeffs[i].1 += value,
            Err(i) => coeffs.insert(i, (var, value)),
        }
        coeffs.retain(|&(_, v)| v != 0.0);
    }

    pub fn objective_value(&self, x: &[f64]) -> f64 {
        self.vars.iter().zip(x).map(|(v, xi)| v.cost * xi).sum()
    }

    pub fn row_activity(&self, row: usize, x: &[f64]) -> f64 {
        self.rows[row].coeffs.iter().map(|&(j, v)| v * x[j]).sum()
    }

    /// Largest violation of any row or bound at `x`.
    pub fn max_violation(&self, x: &[f64]) -> f64 {
        let mut worst: f64 = 0.0;
        for (j, v) in self.vars.iter().enumerate() {
            worst = worst.max(v.lower - x[j]).max(x[j] - v.upper);
        }
        for (i, row) in self.rows.iter().enumerate() {
            let act = self.row_activity(i, x);
            let viol = match row.relation {
                Relation::Le => act - row.rhs,
                Relation::Ge => row.rhs - act,
                Relation::Eq => (act - row.rhs).abs(),
            };
            worst = worst.max(viol);
        }
        worst
    }

    pub(crate) fn validate(&self) -> Result<(), LpError> {
        for v in &self.vars {
            if v.cost.is_nan() || !v.cost.is_finite() {
                return Err(LpError::Malformed(format!("non-finite cost on {}", v.name)));
            }
            if v.lower.is_nan() || v.upper.is_nan() || v.lower > v.upper {
                return Err(LpError::Malformed(format!("bad bounds on {}", v.name)));
            }
            if v.lower == f64::INFINITY || v.upper == f64::NEG_INFINITY {
                return Err(LpError::Malformed(format!("empty bound range on {}", v.name)));
            }
        }
        for r in &self.rows {
            if !r.rhs.is_finite() {
                return Err(LpError::Malformed(format!("non-finite rhs on {}", r.name)));
            }
            for &(j, v) in &r.coeffs {
                if j >= self.vars.len() || !v.is_finite() {
                    return Err(LpError::Malformed(format!("bad coefficient in {}", r.name)));
                }
            }
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum LpStatus {
    Optimal,
    Infeasible,
    Unbounded,
}

#[derive(Clone, Debug)]
pub struct LpSolution {
    pub status: LpStatus,
    pub x: Vec<f64>,
    /// Row duals in the convention `d_j = c_j - sum_i y_i a_ij`: nonpositive
    /// on `<=` rows, nonnegative on `>=` rows of a minimization.
    pub duals: Vec<f64>,
    pub reduced_costs: Vec<f64>,
    pub objective: f64,
    /// Present iff the status is `Infeasible`; normalized to infinity-norm 1.
    pub farkas_ray: Option<Vec<f64>>,
    pub iterations: usize,
}

/// Checks that `ray` proves `lp` infeasible: the sign of each component
/// matches its row relation, and `ray'b` exceeds the maximum of `ray'Ax`
/// over the variable box.
pub fn verify_farkas(lp: &LinearProgram, ray: &[f64], tol: f64) -> bool {
    if ray.len() != lp.num_rows() {
        return false;
    }
    let mut col = vec![0.0; lp.num_vars()];
    let mut rhs = 0.0;
    for (i, row) in lp.rows().iter().enumerate() {
        let yi = ray[i];
        let sign_ok = match row.relation {
            Relation::Le => yi <= tol,
            Relation::Ge => yi >= -tol,
            Relation::Eq => true,
        };
        if !sign_ok {
            return false;
        }
        rhs += yi * row.rhs;
        for &(j, v) in &row.coeffs {
            col[j] += yi * v;
        }
    }
    let mut max_lhs = 0.0;
    for (j, var) in lp.vars().iter().enumerate() {
        let g = col[j];
        if g.abs() <= tol * 1e-3 {
            continue;
        }
        let bound = if g > 0.0 { var.upper } else { var.lower };
        if !bound.is_finite() {
            if g.abs() > tol {
                return false;
            }
            continue;
        }
        max_lhs += g * bound;
    }
    rhs - max_lhs > tol
}

#[cfg(test)]
mod tests;
