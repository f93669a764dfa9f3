//! Restricted relaxed master: cancellations, aircraft routes, the gate-cost
//! estimate `q`, and every cut pooled so far. Solved by column generation
//! on its relaxation followed by a MILP over the pooled columns.

use std::collections::{HashMap, HashSet};
use std::time::Instant;

use rayon::prelude::*;

use crate::cut::{ColumnId, CutFunctional, CutKind};
use crate::error::{RecoveryError, Result};
use crate::lp::{solve_lp, solve_mip, LinearProgram, LpSolution, LpStatus, MipOptions, MipStatus, Relation};
use crate::network::Network;
use crate::route::{price_routes, route_reduced_cost, routes_below, AircraftRoute, RouteDuals, TOL_RC};

/// Integer master solution.
#[derive(Clone, Debug, PartialEq)]
pub struct MasterSolution {
    /// Selected columns, sorted.
    pub selected: Vec<ColumnId>,
    pub cancelled: Vec<usize>,
    pub q: f64,
    /// MILP objective `v_M`.
    pub objective: f64,
    /// Converged relaxation objective.
    pub lp_objective: f64,
    /// Valid lower bound on the master over all routes: the relaxation,
    /// or the integer optimum capped at the target once every route that
    /// could undercut the target is pooled.
    pub lower_bound: f64,
}

impl MasterSolution {
    /// Cancellation plus route cost: `v_M - q`.
    pub fn schedule_cost(&self) -> f64 {
        self.objective - self.q
    }
}

pub enum MasterOutcome {
    Solved(MasterSolution),
    /// No integer point below the target remains: `lower_bound` is valid.
    Exhausted {
        lower_bound: f64,
    },
    /// The pooled MILP is infeasible but routes outside the pool may
    /// still exist.
    Stuck {
        lower_bound: f64,
    },
}

/// Slack on the enumeration threshold so rounding never drops a route.
const TOL_ENUM: f64 = 1e-6;

struct Layout {
    n_flights: usize,
    y: Vec<ColumnId>,
    q: Option<usize>,
    cover: Vec<usize>,
    slot_dep: Vec<(usize, usize)>,
    slot_arr: Vec<(usize, usize)>,
    aircraft: Vec<usize>,
    cut_rows: Vec<usize>,
}

/// Up to `k` negative routes of aircraft `r` not yet pooled. Pooled support
/// columns of no-good and similar cuts can look negative under the folded
/// duals and dominate the labels of new routes, so when the labeling finds
/// only pooled routes the negative ones are enumerated, bisecting the
/// threshold when there are more than `limit`.
fn price_new_routes(
    net: &Network,
    r: usize,
    duals: &RouteDuals,
    k: usize,
    limit: usize,
    pooled: &HashSet<(usize, Vec<usize>)>,
) -> Vec<(AircraftRoute, f64)> {
    let is_new = |route: &AircraftRoute| !pooled.contains(&(r, route.copies.clone()));
    let found = price_routes(net, r, duals, k);
    let Some(cheapest) = found.first().map(|f| f.1) else { return Vec::new() };
    let fresh: Vec<_> = found.into_iter().filter(|(route, _)| is_new(route)).collect();
    if !fresh.is_empty() {
        return fresh;
    }
    let (mut lo, mut hi) = (cheapest - 1.0, None::<f64>);
    let mut t = -TOL_RC;
    for _ in 0..64 {
        match routes_below(net, r, duals, t, limit) {
            Some(all) => {
                let fresh: Vec<_> = all.into_iter().filter(|(route, _)| is_new(route)).take(k).collect();
                if !fresh.is_empty() || hi.is_none() {
                    return fresh;
                }
                lo = t;
            }
            None => hi = Some(t),
        }
        t = 0.5 * (lo + hi.unwrap_or(-TOL_RC));
    }
    Vec::new()
}

pub struct Master<'a> {
    net: &'a Network,
    pub pools: Vec<Vec<AircraftRoute>>,
    keys: HashSet<(usize, Vec<usize>)>,
    pub cuts: Vec<CutKind>,
    cut_keys: HashSet<String>,
    pub dep_caps: Vec<u32>,
    pub arr_caps: Vec<u32>,
    /// Whether the objective carries the gate-cost variable `q`.
    pub with_gate_cost: bool,
    /// Duals at the last converged relaxation.
    pub last_duals: Option<RouteDuals>,
    pub columns_added: usize,
    pub lp_solves: usize,
}

impl<'a> Master<'a> {
    pub fn new(net: &'a Network, seeds: Vec<Vec<AircraftRoute>>) -> Self {
        let mut m = Master {
            net,
            pools: vec![Vec::new(); net.inst.aircraft.len()],
            keys: HashSet::new(),
            cuts: Vec::new(),
            cut_keys: HashSet::new(),
            dep_caps: net.inst.slots.iter().map(|s| s.dep_cap).collect(),
            arr_caps: net.inst.slots.iter().map(|s| s.arr_cap).collect(),
            with_gate_cost: true,
            last_duals: None,
            columns_added: 0,
            lp_solves: 0,
        };
        for route in seeds.into_iter().flatten() {
            m.add_column(route);
        }
        m.columns_added = 0;
        m
    }

    pub fn net(&self) -> &'a Network {
        self.net
    }

    pub fn add_column(&mut self, route: AircraftRoute) -> bool {
        if !self.keys.insert((route.aircraft, route.copies.clone())) {
            return false;
        }
        self.pools[route.aircraft].push(route);
        self.columns_added += 1;
        true
    }

    pub fn route(&self, id: ColumnId) -> &AircraftRoute {
        &self.pools[id.0][id.1]
    }

    /// Adds a cut unless trivial or already pooled. Returns whether added.
    pub fn add_cut(&mut self, cut: CutKind) -> Result<bool> {
        let key = match &cut {
            CutKind::Feasibility(f) | CutKind::Optimality(f) => {
                if matches!(cut, CutKind::Feasibility(_)) && f.is_trivial() {
                    return Ok(false);
                }
                format!("{}:{}", cut.name(), f.key())
            }
            CutKind::NoGood { support } | CutKind::Exclude { support } => format!("{}:{support:?}", cut.name()),
            CutKind::Llc { support, value, lower } | CutKind::Global { support, value, lower } => {
                if lower > value {
                    return Err(RecoveryError::InvalidBound(format!("lower bound {lower} exceeds value {value}")));
                }
                format!("{}:{support:?}:{}:{}", cut.name(), (value * 1e9).round(), (lower * 1e9).round())
            }
        };
        if !self.cut_keys.insert(key) {
            return Ok(false);
        }
        self.cuts.push(cut);
        Ok(true)
    }

    fn build(&self) -> (LinearProgram, Layout) {
        let net = self.net;
        let mut lp = LinearProgram::new();
        let n_flights = net.inst.flights.len();
        // No explicit upper bounds: cover and aircraft rows imply them, and
        // bound duals would hide negative reduced costs from pricing.
        for j in 0..n_flights {
            lp.add_var(format!("z_{}", net.inst.flights[j].id), net.inst.cancel_cost(j), 0.0, f64::INFINITY);
        }
        let mut y = Vec::new();
        for (r, pool) in self.pools.iter().enumerate() {
            for (p, route) in pool.iter().enumerate() {
                lp.add_var(format!("y_{}_{p}", net.inst.aircraft[r].id), route.cost, 0.0, f64::INFINITY);
                y.push((r, p));
            }
        }
        let q = self.with_gate_cost.then(|| lp.add_var("q", 1.0, 0.0, f64::INFINITY));
        let yvar = |k: usize| n_flights + k;

        let mut cover_coefs: Vec<Vec<(usize, f64)>> = (0..n_flights).map(|j| vec![(j, 1.0)]).collect();
        let mut dep_coefs: HashMap<usize, Vec<(usize, f64)>> = HashMap::new();
        let mut arr_coefs: HashMap<usize, Vec<(usize, f64)>> = HashMap::new();
        let mut ac_coefs: Vec<Vec<(usize, f64)>> = vec![Vec::new(); self.pools.len()];
        for (k, &(r, p)) in y.iter().enumerate() {
            let route = &self.pools[r][p];
            ac_coefs[r].push((yvar(k), 1.0));
            for &c in &route.copies {
                let cp = &net.copies[c];
                cover_coefs[cp.flight].push((yvar(k), 1.0));
                if let Some(s) = cp.dep_slot {
                    dep_coefs.entry(s).or_default().push((yvar(k), 1.0));
                }
                if let Some(s) = cp.arr_slot {
                    arr_coefs.entry(s).or_default().push((yvar(k), 1.0));
                }
            }
        }
        let cover = cover_coefs
            .into_iter()
            .enumerate()
            .map(|(j, c)| lp.add_row(format!("cover_{}", net.inst.flights[j].id), c, Relation::Eq, 1.0))
            .collect();
        let mut slot_rows = |coefs: HashMap<usize, Vec<(usize, f64)>>, caps: &[u32], tag: &str| {
            let mut keys: Vec<usize> = coefs.keys().copied().collect();
            keys.sort_unstable();
            keys.into_iter()
                .map(|s| {
                    let row = lp.add_row(format!("{tag}_{s}"), coefs[&s].clone(), Relation::Le, caps[s] as f64);
                    (s, row)
                })
                .collect::<Vec<_>>()
        };
        let slot_dep = slot_rows(dep_coefs, &self.dep_caps, "sdep");
        let slot_arr = slot_rows(arr_coefs, &self.arr_caps, "sarr");
        let aircraft = ac_coefs
            .into_iter()
            .enumerate()
            .map(|(r, c)| lp.add_row(format!("ac_{}", net.inst.aircraft[r].id), c, Relation::Le, 1.0))
            .collect();

        let mut cut_rows = Vec::with_capacity(self.cuts.len());
        for (i, cut) in self.cuts.iter().enumerate() {
            let name = format!("{}_{i}", cut.name());
            let in_s = |s: &[ColumnId], id: &ColumnId| s.binary_search(id).is_ok();
            let row = match cut {
                CutKind::Feasibility(f) | CutKind::Optimality(f) => {
                    let mut coefs: Vec<(usize, f64)> = y
                        .iter()
                        .enumerate()
                        .map(|(k, &id)| (yvar(k), f.route_coef(net, self.route(id))))
                        .filter(|(_, v)| *v != 0.0)
                        .collect();
                    if let (CutKind::Optimality(_), Some(qv)) = (cut, q) {
                        coefs.push((qv, -1.0));
                    }
                    lp.add_row(name, coefs, Relation::Le, f.constant)
                }
                CutKind::NoGood { support } => {
                    let coefs = y.iter().enumerate().filter(|(_, id)| in_s(support, id)).map(|(k, _)| (yvar(k), 1.0));
                    lp.add_row(name, coefs, Relation::Le, support.len() as f64 - 1.0)
                }
                CutKind::Exclude { support } => {
                    let coefs =
                        y.iter().enumerate().map(|(k, id)| (yvar(k), if in_s(support, id) { 1.0 } else { -1.0 }));
                    lp.add_row(name, coefs, Relation::Le, support.len() as f64 - 1.0)
                }
                CutKind::Llc { support, value, lower } => {
                    let d = value - lower;
                    let mut coefs: Vec<(usize, f64)> =
                        y.iter().enumerate().filter(|(_, id)| in_s(support, id)).map(|(k, _)| (yvar(k), -d)).collect();
                    coefs.extend(q.map(|qv| (qv, 1.0)));
                    lp.add_row(name, coefs, Relation::Ge, lower - d * (support.len() as f64 - 1.0))
                }
                CutKind::Global { support, value, lower } => {
                    let d = value - lower;
                    let mut coefs: Vec<(usize, f64)> =
                        y.iter().enumerate().map(|(k, id)| (yvar(k), if in_s(support, id) { -d } else { d })).collect();
                    coefs.extend(q.map(|qv| (qv, 1.0)));
                    lp.add_row(name, coefs, Relation::Ge, value - d * support.len() as f64)
                }
            };
            cut_rows.push(row);
        }
        let layout = Layout { n_flights, y, q, cover, slot_dep, slot_arr, aircraft, cut_rows };
        (lp, layout)
    }

    fn route_duals(&self, sol: &LpSolution, layout: &Layout) -> RouteDuals {
        let d = &sol.duals;
        let cover: Vec<f64> = layout.cover.iter().map(|&i| d[i]).collect();
        let slot_dep: HashMap<usize, f64> = layout.slot_dep.iter().map(|&(s, i)| (s, d[i])).collect();
        let slot_arr: HashMap<usize, f64> = layout.slot_arr.iter().map(|&(s, i)| (s, d[i])).collect();
        let aircraft: Vec<f64> = layout.aircraft.iter().map(|&i| d[i]).collect();
        let mut funcs: Vec<(f64, &CutFunctional)> = Vec::new();
        let mut constants: Vec<(f64, f64)> = Vec::new();
        for (cut, &row) in self.cuts.iter().zip(&layout.cut_rows) {
            match cut {
                CutKind::Feasibility(f) | CutKind::Optimality(f) => funcs.push((d[row], f)),
                CutKind::Global { value, lower, .. } => constants.push((d[row], value - lower)),
                CutKind::Exclude { .. } => constants.push((d[row], -1.0)),
                CutKind::NoGood { .. } | CutKind::Llc { .. } => {}
            }
        }
        RouteDuals::from_parts(self.net, &cover, &slot_dep, &slot_arr, &aircraft, &funcs, &constants)
    }

    /// Column generation on the relaxation until no route prices out.
    /// `None` when the relaxation is infeasible.
    pub fn solve_relaxation(&mut self, deadline: Option<Instant>) -> Result<Option<f64>> {
        let k = self.net.inst.config.columns_per_round;
        loop {
            let (lp, layout) = self.build();
            let sol = solve_lp(&lp)?;
            self.lp_solves += 1;
            match sol.status {
                LpStatus::Optimal => {}
                LpStatus::Infeasible => return Ok(None),
                LpStatus::Unbounded => {
                    return Err(RecoveryError::Lp(crate::lp::LpError::Numerical("unbounded master".into())))
                }
            }
            let duals = self.route_duals(&sol, &layout);
            let net = self.net;
            let keys = &self.keys;
            let limit = net.inst.config.enumeration_budget.max(1);
            let found: Vec<Vec<(AircraftRoute, f64)>> = (0..self.pools.len())
                .into_par_iter()
                .map(|r| price_new_routes(net, r, &duals, k, limit, keys))
                .collect();
            let mut added = false;
            for (route, rc) in found.into_iter().flatten() {
                debug_assert!((route_reduced_cost(net, &route, &duals) - rc).abs() < 1e-6);
                added |= self.add_column(route);
            }
            if !added {
                self.last_duals = Some(duals);
                return Ok(Some(sol.objective));
            }
            if deadline.is_some_and(|d| Instant::now() >= d) {
                return Err(RecoveryError::TimeLimit);
            }
        }
    }

    /// MILP over the pooled columns. `None` when it is infeasible.
    pub fn solve_integer(&self, deadline: Option<Instant>) -> Result<Option<(Vec<f64>, f64)>> {
        let (lp, layout) = self.build();
        let ints: Vec<usize> = (0..layout.n_flights + layout.y.len()).collect();
        let sol = solve_mip(&lp, &ints, &MipOptions { deadline, node_limit: 0 })?;
        match sol.status {
            MipStatus::Infeasible => Ok(None),
            MipStatus::TimeLimit if !sol.has_incumbent() => Err(RecoveryError::TimeLimit),
            _ => Ok(Some((sol.x, sol.objective))),
        }
    }

    /// Pools every route with reduced cost below `threshold` at the last
    /// converged duals. `false` when more than `limit` would be needed.
    pub fn enumerate_below(&mut self, threshold: f64, limit: usize) -> bool {
        let Some(duals) = self.last_duals.clone() else { return false };
        let net = self.net;
        let found: Vec<Option<Vec<(AircraftRoute, f64)>>> =
            (0..self.pools.len()).into_par_iter().map(|r| routes_below(net, r, &duals, threshold, limit)).collect();
        let mut total = 0;
        let mut all = Vec::new();
        for f in found {
            let Some(routes) = f else { return false };
            total += routes.len();
            if total > limit {
                return false;
            }
            all.extend(routes);
        }
        for (route, _) in all {
            self.add_column(route);
        }
        true
    }

    /// Relaxation by column generation, then the MILP restriction.
    pub fn solve(&mut self, deadline: Option<Instant>) -> Result<Option<MasterSolution>> {
        Ok(match self.solve_toward(deadline, None, 0)? {
            MasterOutcome::Solved(ms) => Some(ms),
            _ => None,
        })
    }

    /// As `solve`, and when `target` exceeds the relaxation, first pools
    /// every route that could appear in a solution cheaper than `target`
    /// (at most `limit` of them), so the integer optimum yields a valid
    /// bound.
    pub fn solve_toward(
        &mut self,
        deadline: Option<Instant>,
        target: Option<f64>,
        limit: usize,
    ) -> Result<MasterOutcome> {
        let Some(lp_objective) = self.solve_relaxation(deadline)? else {
            return Ok(MasterOutcome::Exhausted { lower_bound: f64::INFINITY });
        };
        let complete = match target {
            Some(t) if t > lp_objective + 1e-9 && limit > 0 => {
                self.enumerate_below(t - lp_objective + TOL_ENUM, limit).then_some(t)
            }
            _ => None,
        };
        let (lp, layout) = self.build();
        drop(lp);
        let Some((x, objective)) = self.solve_integer(deadline)? else {
            return Ok(match complete {
                Some(t) => MasterOutcome::Exhausted { lower_bound: t },
                None => MasterOutcome::Stuck { lower_bound: lp_objective },
            });
        };
        let selected: Vec<ColumnId> =
            layout.y.iter().enumerate().filter(|(k, _)| x[layout.n_flights + k] > 0.5).map(|(_, &id)| id).collect();
        let cancelled = (0..layout.n_flights).filter(|&j| x[j] > 0.5).collect();
        let q = layout.q.map_or(0.0, |i| x[i]);
        let mut selected = selected;
        selected.sort_unstable();
        let lower_bound = match complete {
            Some(t) => objective.min(t).max(lp_objective),
            None => lp_objective,
        };
        Ok(MasterOutcome::Solved(MasterSolution { selected, cancelled, q, objective, lp_objective, lower_bound }))
    }

    pub fn pool_size(&self) -> usize {
        self.pools.iter().map(Vec::len).sum()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;
    use crate::route::seed_routes;

    #[test]
    fn t1_master_flies_plan_at_zero_cost() {
        let net = Network::build(&fixtures::t1()).unwrap();
        let mut m = Master::new(&net, seed_routes(&net));
        let sol = m.solve(None).unwrap().unwrap();
        assert_eq!(sol.objective, 0.0);
        assert!(sol.cancelled.is_empty());
        let r = m.route(sol.selected[0]);
        assert_eq!(r.copies, vec![net.copies_of_flight[0][0], net.copies_of_flight[1][0]]);
    }

    #[test]
    fn closure_delays_instead_of_cancelling() {
        let net = Network::build(&fixtures::t1_closure()).unwrap();
        let mut m = Master::new(&net, seed_routes(&net));
        let sol = m.solve(None).unwrap().unwrap();
        assert!(sol.cancelled.is_empty());
        assert_eq!(sol.objective, 30.0);
    }

    #[test]
    fn empty_pools_cancel_everything() {
        let net = Network::build(&fixtures::t1()).unwrap();
        let mut m = Master::new(&net, vec![Vec::new()]);
        let (x, obj) = m.solve_integer(None).unwrap().unwrap();
        assert_eq!(obj, 400.0);
        assert!(x[..2].iter().all(|&v| v > 0.5));
        // pricing then recovers the plan
        assert_eq!(m.solve(None).unwrap().unwrap().objective, 0.0);
    }

    #[test]
    fn cut_row_count_and_dedup() {
        let net = Network::build(&fixtures::t1()).unwrap();
        let mut m = Master::new(&net, seed_routes(&net));
        let rows = m.build().0.num_rows();
        let mut f = CutFunctional::default();
        f.act.insert(net.dep_key(net.copies_of_flight[0][0]), 1.0);
        assert!(m.add_cut(CutKind::Feasibility(f.clone())).unwrap());
        assert!(!m.add_cut(CutKind::Feasibility(f)).unwrap());
        assert!(!m.add_cut(CutKind::Feasibility(CutFunctional::default())).unwrap());
        assert_eq!(m.build().0.num_rows(), rows + 1);
        let bad = CutKind::Llc { support: vec![(0, 0)], value: 1.0, lower: 2.0 };
        assert!(matches!(m.add_cut(bad), Err(RecoveryError::InvalidBound(_))));
    }

    #[test]
    fn nogood_excludes_point() {
        let net = Network::build(&fixtures::t1()).unwrap();
        let mut m = Master::new(&net, seed_routes(&net));
        let first = m.solve(None).unwrap().unwrap();
        m.add_cut(CutKind::NoGood { support: first.selected.clone() }).unwrap();
        let second = m.solve(None).unwrap().unwrap();
        assert_ne!(second.selected, first.selected);
        assert!(second.objective > first.objective);
    }

    #[test]
    fn llc_forces_gate_value() {
        let net = Network::build(&fixtures::t1()).unwrap();
        let mut m = Master::new(&net, seed_routes(&net));
        let first = m.solve(None).unwrap().unwrap();
        m.add_cut(CutKind::Llc { support: first.selected.clone(), value: 8.0, lower: 0.0 }).unwrap();
        let second = m.solve(None).unwrap().unwrap();
        assert_eq!(second.selected, first.selected);
        assert!((second.q - 8.0).abs() < 1e-9);
    }
}
