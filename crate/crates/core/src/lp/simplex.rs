#![allow(clippy::needless_range_loop)]

use super::{LinearProgram, LpError, LpSolution, LpStatus, Relation, TOL_DUAL, TOL_FEAS};

const PIVOT_TOL: f64 = 1e-9;
const REFACTOR_EVERY: usize = 64;
const DEGENERATE_LIMIT: usize = 1000;

/// How an original variable maps onto nonnegative internal columns.
#[derive(Clone, Copy, Debug)]
enum VarMap {
    /// `x = offset + t`, `t in [0, upper - lower]`.
    Shift { col: usize, offset: f64 },
    /// `x = offset - t`, `t >= 0` (upper-bounded only).
    Negate { col: usize, offset: f64 },
    /// `x = t+ - t-`.
    Split { pos: usize, neg: usize },
}

/// `min c't` over `A t (+ slacks) = b`, `0 <= t <= u`.
struct StandardForm {
    cols: Vec<Vec<(usize, f64)>>,
    cost: Vec<f64>,
    upper: Vec<f64>,
    b: Vec<f64>,
    obj_offset: f64,
    var_map: Vec<VarMap>,
    slack_of_row: Vec<Option<usize>>,
    art_start: usize,
}

impl StandardForm {
    fn build(lp: &LinearProgram) -> Self {
        let m = lp.num_rows();
        let n = lp.num_vars();
        let mut by_var: Vec<Vec<(usize, f64)>> = vec![Vec::new(); n];
        for (i, row) in lp.rows().iter().enumerate() {
            for &(j, v) in &row.coeffs {
                by_var[j].push((i, v));
            }
        }
        let mut b: Vec<f64> = lp.rows().iter().map(|r| r.rhs).collect();
        let mut cols = Vec::with_capacity(n + 2 * m);
        let mut cost = Vec::with_capacity(n + 2 * m);
        let mut upper = Vec::with_capacity(n + 2 * m);
        let mut var_map = Vec::with_capacity(n);
        let mut obj_offset = 0.0;
        for (j, var) in lp.vars().iter().enumerate() {
            let entries = std::mem::take(&mut by_var[j]);
            if var.lower.is_finite() {
                for &(i, v) in &entries {
                    b[i] -= v * var.lower;
                }
                obj_offset += var.cost * var.lower;
                var_map.push(VarMap::Shift { col: cols.len(), offset: var.lower });
                cost.push(var.cost);
                upper.push(var.upper - var.lower);
                cols.push(entries);
            } else if var.upper.is_finite() {
                for &(i, v) in &entries {
                    b[i] -= v * var.upper;
                }
                obj_offset += var.cost * var.upper;
                var_map.push(VarMap::Negate { col: cols.len(), offset: var.upper });
                cost.push(-var.cost);
                upper.push(f64::INFINITY);
                cols.push(entries.iter().map(|&(i, v)| (i, -v)).collect());
            } else {
                let pos = cols.len();
                cost.push(var.cost);
                upper.push(f64::INFINITY);
                cols.push(entries.clone());
                cost.push(-var.cost);
                upper.push(f64::INFINITY);
                cols.push(entries.iter().map(|&(i, v)| (i, -v)).collect());
                var_map.push(VarMap::Split { pos, neg: pos + 1 });
            }
        }
        let mut slack_of_row = vec![None; m];
        for (i, row) in lp.rows().iter().enumerate() {
            let coef = match row.relation {
                Relation::Le => 1.0,
                Relation::Ge => -1.0,
                Relation::Eq => continue,
            };
            slack_of_row[i] = Some(cols.len());
            cols.push(vec![(i, coef)]);
            cost.push(0.0);
            upper.push(f64::INFINITY);
        }
        let art_start = cols.len();
        for (i, bi) in b.iter().enumerate() {
            let sign = if *bi >= 0.0 { 1.0 } else { -1.0 };
            cols.push(vec![(i, sign)]);
            cost.push(0.0);
            upper.push(0.0);
        }
        StandardForm { cols, cost, upper, b, obj_offset, var_map, slack_of_row, art_start }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum VarState {
    Basic,
    Lower,
    Upper,
}

enum PhaseOutcome {
    Optimal,
    Unbounded,
}

struct Simplex<'a> {
    m: usize,
    cols: &'a [Vec<(usize, f64)>],
    b: &'a [f64],
    upper: Vec<f64>,
    basis: Vec<usize>,
    state: Vec<VarState>,
    x: Vec<f64>,
    binv: Vec<f64>,
    iterations: usize,
    since_refactor: usize,
    degenerate_run: usize,
    bland: bool,
}

impl<'a> Simplex<'a> {
    fn refactor(&mut self) -> Result<(), LpError> {
        let m = self.m;
        let mut mat = vec![0.0; m * m];
        for (pos, &col) in self.basis.iter().enumerate() {
            for &(i, v) in &self.cols[col] {
                mat[i * m + pos] = v;
            }
        }
        let mut inv = vec![0.0; m * m];
        for i in 0..m {
            inv[i * m + i] = 1.0;
        }
        for c in 0..m {
            let mut piv = c;
            let mut best = mat[c * m + c].abs();
            for r in c + 1..m {
                let v = mat[r * m + c].abs();
                if v > best {
                    best = v;
                    piv = r;
                }
            }
            if best < 1e-11 {
                return Err(LpError::Numerical("singular basis".into()));
            }
            if piv != c {
                for k in 0..m {
                    mat.swap(c * m + k, piv * m + k);
                    inv.swap(c * m + k, piv * m + k);
                }
            }
            let d = mat[c * m + c];
            for k in 0..m {
                mat[c * m + k] /= d;
                inv[c * m + k] /= d;
            }
            for r in 0..m {
                if r == c {
                    continue;
                }
                let f = mat[r * m + c];
                if f == 0.0 {
                    continue;
                }
                for k in 0..m {
                    mat[r * m + k] -= f * mat[c * m + k];
                    inv[r * m + k] -= f * inv[c * m + k];
                }
            }
        }
        self.binv = inv;
        self.since_refactor = 0;
        self.recompute_basic_values();
        Ok(())
    }

    fn recompute_basic_values(&mut self) {
        let m = self.m;
        let mut rhs = self.b.to_vec();
        for (j, st) in self.state.iter().enumerate() {
            if *st == VarState::Upper {
                let u = self.upper[j];
                for &(i, v) in &self.cols[j] {
                    rhs[i] -= v * u;
                }
            }
        }
        for pos in 0..m {
            let row = &self.binv[pos * m..(pos + 1) * m];
            let val: f64 = row.iter().zip(&rhs).map(|(a, b)| a * b).sum();
            self.x[self.basis[pos]] = val;
        }
    }

    fn duals(&self, cost: &[f64]) -> Vec<f64> {
        let m = self.m;
        let mut y = vec![0.0; m];
        for pos in 0..m {
            let cb = cost[self.basis[pos]];
            if cb == 0.0 {
                continue;
            }
            let row = &self.binv[pos * m..(pos + 1) * m];
            for k in 0..m {
                y[k] += cb * row[k];
            }
        }
        y
    }

    fn reduced_cost(&self, cost: &[f64], y: &[f64], j: usize) -> f64 {
        cost[j] - self.cols[j].iter().map(|&(i, v)| y[i] * v).sum::<f64>()
    }

    fn ftran(&self, j: usize) -> Vec<f64> {
        let m = self.m;
        let mut alpha = vec![0.0; m];
        for &(k, v) in &self.cols[j] {
            for (pos, a) in alpha.iter_mut().enumerate() {
                *a += self.binv[pos * m + k] * v;
            }
        }
        alpha
    }

    fn run(&mut self, cost: &[f64], max_iter: usize) -> Result<PhaseOutcome, LpError> {
        let m = self.m;
        loop {
            if self.iterations >= max_iter {
                return Err(LpError::Numerical(format!("iteration limit {max_iter} reached (cycling?)")));
            }
            if self.since_refactor >= REFACTOR_EVERY {
                self.refactor()?;
            }
            let y = self.duals(cost);

            // Pricing.
            let mut entering: Option<(usize, f64)> = None;
            for j in 0..self.cols.len() {
                let st = self.state[j];
                if st == VarState::Basic || self.upper[j] == 0.0 {
                    continue;
                }
                let d = self.reduced_cost(cost, &y, j);
                let eligible = match st {
                    VarState::Lower => d < -TOL_DUAL,
                    VarState::Upper => d > TOL_DUAL,
                    VarState::Basic => false,
                };
                if !eligible {
                    continue;
                }
                if self.bland {
                    entering = Some((j, d));
                    break;
                }
                if entering.is_none_or(|(_, best)| d.abs() > best.abs()) {
                    entering = Some((j, d));
                }
            }
            let Some((q, _)) = entering else {
                return Ok(PhaseOutcome::Optimal);
            };
            let dir = if self.state[q] == VarState::Lower { 1.0 } else { -1.0 };
            let alpha = self.ftran(q);

            // Ratio test.
            let mut theta = self.upper[q];
            let mut leave: Option<(usize, bool)> = None;
            let mut leave_key = (f64::INFINITY, 0.0_f64, usize::MAX);
            for pos in 0..m {
                let delta = dir * alpha[pos];
                let bv = self.basis[pos];
                let (t, to_upper) = if delta > PIVOT_TOL {
                    ((self.x[bv]).max(0.0) / delta, false)
                } else if delta < -PIVOT_TOL && self.upper[bv].is_finite() {
                    ((self.upper[bv] - self.x[bv]).max(0.0) / -delta, true)
                } else {
                    continue;
                };
                let better = if self.bland {
                    t < leave_key.0 - 1e-12 || (t <= leave_key.0 + 1e-12 && bv < leave_key.2)
                } else {
                    t < leave_key.0 - 1e-12 || (t <= leave_key.0 + 1e-12 && delta.abs() > leave_key.1)
                };
                if better {
                    leave_key = (t, delta.abs(), bv);
                    leave = Some((pos, to_upper));
                }
            }
            let flip = leave.is_none() || self.upper[q] <= leave_key.0;
            if !flip {
                theta = leave_key.0;
            }
            if !theta.is_finite() {
                return Ok(PhaseOutcome::Unbounded);
            }

            self.iterations += 1;
            if theta <= 1e-12 {
                self.degenerate_run += 1;
                if self.degenerate_run > DEGENERATE_LIMIT {
                    self.bland = true;
                }
            } else {
                self.degenerate_run = 0;
            }

            for pos in 0..m {
                let bv = self.basis[pos];
                self.x[bv] -= dir * theta * alpha[pos];
            }
            self.x[q] += dir * theta;

            if flip {
                self.state[q] = if dir > 0.0 { VarState::Upper } else { VarState::Lower };
                self.x[q] = if dir > 0.0 { self.upper[q] } else { 0.0 };
                continue;
            }

            let (r, to_upper) = leave.expect("pivot row");
            let out = self.basis[r];
            self.state[out] = if to_upper { VarState::Upper } else { VarState::Lower };
            self.x[out] = if to_upper { self.upper[out] } else { 0.0 };
            self.basis[r] = q;
            self.state[q] = VarState::Basic;

            let piv = alpha[r];
            for k in 0..m {
                self.binv[r * m + k] /= piv;
            }
            for pos in 0..m {
                if pos == r || alpha[pos] == 0.0 {
                    continue;
                }
                let f = alpha[pos];
                for k in 0..m {
                    self.binv[pos * m + k] -= f * self.binv[r * m + k];
                }
            }
            self.since_refactor += 1;
        }
    }
}

/// Solves `lp` with a two-phase bounded revised simplex.
pub fn solve_lp(lp: &LinearProgram) -> Result<LpSolution, LpError> {
    lp.validate()?;
    let sf = StandardForm::build(lp);
    let m = lp.num_rows();
    let ncols = sf.cols.len();
    let max_iter = 50_000 + 50 * (m + ncols);

    let mut upper = sf.upper.clone();
    let mut basis = Vec::with_capacity(m);
    let mut state = vec![VarState::Lower; ncols];
    let mut x = vec![0.0; ncols];
    let mut binv = vec![0.0; m * m];
    let mut phase_one_cost = vec![0.0; ncols];
    let mut needs_phase_one = false;
    for i in 0..m {
        let bi = sf.b[i];
        let slack_ok = match (lp.rows()[i].relation, sf.slack_of_row[i]) {
            (Relation::Le, Some(s)) if bi >= 0.0 => Some((s, 1.0)),
            (Relation::Ge, Some(s)) if bi <= 0.0 => Some((s, -1.0)),
            _ => None,
        };
        let (col, coef) = match slack_ok {
            Some(sc) => sc,
            None => {
                let a = sf.art_start + i;
                upper[a] = f64::INFINITY;
                phase_one_cost[a] = 1.0;
                needs_phase_one = true;
                (a, sf.cols[a][0].1)
            }
        };
        basis.push(col);
        state[col] = VarState::Basic;
        x[col] = bi / coef;
        binv[i * m + i] = 1.0 / coef;
    }

    let mut spx = Simplex {
        m,
        cols: &sf.cols,
        b: &sf.b,
        upper,
        basis,
        state,
        x,
        binv,
        iterations: 0,
        since_refactor: 0,
        degenerate_run: 0,
        bland: false,
    };

    let bmax = sf.b.iter().fold(0.0_f64, |a, v| a.max(v.abs()));
    if needs_phase_one {
        match spx.run(&phase_one_cost, max_iter)? {
            PhaseOutcome::Optimal => {}
            PhaseOutcome::Unbounded => return Err(LpError::Numerical("phase one reported unbounded".into())),
        }
        spx.refactor()?;
        let infeas: f64 = (sf.art_start..ncols).map(|a| spx.x[a].max(0.0)).sum();
        if infeas > TOL_FEAS * (1.0 + bmax) {
            let mut ray = spx.duals(&phase_one_cost);
            let norm = ray.iter().fold(0.0_f64, |a, v| a.max(v.abs()));
            if norm > 0.0 {
                for v in &mut ray {
                    *v /= norm;
                    if v.abs() < 1e-12 {
                        *v = 0.0;
                    }
                }
            }
            let xs = map_primal(&sf, &spx.x, lp.num_vars());
            return Ok(LpSolution {
                status: LpStatus::Infeasible,
                objective: f64::INFINITY,
                x: xs,
                duals: vec![0.0; m],
                reduced_costs: vec![0.0; lp.num_vars()],
                farkas_ray: Some(ray),
                iterations: spx.iterations,
            });
        }
        for a in sf.art_start..ncols {
            spx.upper[a] = 0.0;
            if spx.state[a] != VarState::Basic {
                spx.state[a] = VarState::Lower;
                spx.x[a] = 0.0;
            }
        }
        spx.degenerate_run = 0;
        spx.bland = false;
    }

    let outcome = spx.run(&sf.cost, max_iter)?;
    spx.refactor()?;
    let xs = map_primal(&sf, &spx.x, lp.num_vars());
    if let PhaseOutcome::Unbounded = outcome {
        return Ok(LpSolution {
            status: LpStatus::Unbounded,
            objective: f64::NEG_INFINITY,
            x: xs,
            duals: vec![0.0; m],
            reduced_costs: vec![0.0; lp.num_vars()],
            farkas_ray: None,
            iterations: spx.iterations,
        });
    }
    let y = spx.duals(&sf.cost);
    let mut reduced = Vec::with_capacity(lp.num_vars());
    for map in &sf.var_map {
        let d = match *map {
            VarMap::Shift { col, .. } => spx.reduced_cost(&sf.cost, &y, col),
            VarMap::Negate { col, .. } => -spx.reduced_cost(&sf.cost, &y, col),
            VarMap::Split { pos, .. } => spx.reduced_cost(&sf.cost, &y, pos),
        };
        reduced.push(d);
    }
    let objective = lp.objective_value(&xs);
    debug_assert!((objective - (sf.obj_offset + dot(&sf.cost, &spx.x))).abs() < 1e-6 * (1.0 + objective.abs()));
    Ok(LpSolution {
        status: LpStatus::Optimal,
        x: xs,
        duals: y,
        reduced_costs: reduced,
        objective,
        farkas_ray: None,
        iterations: spx.iterations,
    })
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn map_primal(sf: &StandardForm, t: &[f64], n: usize) -> Vec<f64> {
    let mut xs = Vec::with_capacity(n);
    for map in &sf.var_map {
        xs.push(match *map {
            VarMap::Shift { col, offset } => offset + t[col],
            VarMap::Negate { col, offset } => offset - t[col],
            VarMap::Split { pos, neg } => t[pos] - t[neg],
        });
    }
    xs
}
